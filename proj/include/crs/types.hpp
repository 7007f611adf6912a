#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crs {

/// Half-open byte range [start, end) into a UTF-8 string.
struct Span {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t length() const noexcept { return end - start; }
    bool empty() const noexcept { return start == end; }
    bool overlaps(const Span& other) const noexcept { return start < other.end && other.start < end; }
    bool contains(const Span& other) const noexcept { return start <= other.start && other.end <= end; }

    friend bool operator==(const Span&, const Span&) = default;
    friend auto operator<=>(const Span&, const Span&) = default;
};

/// Offence taxonomy. The declaration order is the canonical order used for
/// tie-breaking and rendering.
enum class OffenceClass : std::uint8_t { Personal = 0, Racial = 1, Swearing = 2 };

inline constexpr std::array<OffenceClass, 3> kAllClasses = {
    OffenceClass::Personal, OffenceClass::Racial, OffenceClass::Swearing};

std::string_view to_string(OffenceClass c);
std::optional<OffenceClass> parse_offence_class(std::string_view name);

class ClassSet {
public:
    ClassSet() = default;
    ClassSet(std::initializer_list<OffenceClass> classes) {
        for (auto c : classes) insert(c);
    }

    void insert(OffenceClass c) noexcept { bits_ |= bit(c); }
    bool contains(OffenceClass c) const noexcept { return (bits_ & bit(c)) != 0; }
    bool empty() const noexcept { return bits_ == 0; }
    std::size_t size() const noexcept {
        return static_cast<std::size_t>(contains(OffenceClass::Personal)) +
               static_cast<std::size_t>(contains(OffenceClass::Racial)) +
               static_cast<std::size_t>(contains(OffenceClass::Swearing));
    }

    ClassSet& operator|=(const ClassSet& other) noexcept {
        bits_ |= other.bits_;
        return *this;
    }
    friend ClassSet operator|(ClassSet a, const ClassSet& b) noexcept { return a |= b; }
    friend bool operator==(const ClassSet&, const ClassSet&) = default;

    /// Members in canonical order.
    std::vector<OffenceClass> members() const;
    std::vector<std::string> names() const;
    /// "Personal,Swearing"
    std::string join(std::string_view sep = ",") const;

    bool is_subset_of(const ClassSet& other) const noexcept { return (bits_ & ~other.bits_) == 0; }

private:
    static constexpr std::uint8_t bit(OffenceClass c) noexcept {
        return static_cast<std::uint8_t>(1u << static_cast<unsigned>(c));
    }
    std::uint8_t bits_ = 0;
};

}  // namespace crs
