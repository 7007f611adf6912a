#include "crs/types.hpp"

namespace crs {

std::string_view to_string(OffenceClass c) {
    switch (c) {
        case OffenceClass::Personal: return "Personal";
        case OffenceClass::Racial: return "Racial";
        case OffenceClass::Swearing: return "Swearing";
    }
    return "Personal";
}

std::optional<OffenceClass> parse_offence_class(std::string_view name) {
    for (auto c : kAllClasses) {
        if (to_string(c) == name) return c;
    }
    return std::nullopt;
}

std::vector<OffenceClass> ClassSet::members() const {
    std::vector<OffenceClass> out;
    for (auto c : kAllClasses) {
        if (contains(c)) out.push_back(c);
    }
    return out;
}

std::vector<std::string> ClassSet::names() const {
    std::vector<std::string> out;
    for (auto c : members()) out.emplace_back(to_string(c));
    return out;
}

std::string ClassSet::join(std::string_view sep) const {
    std::string out;
    for (auto c : members()) {
        if (!out.empty()) out += sep;
        out += to_string(c);
    }
    return out;
}

}  // namespace crs
