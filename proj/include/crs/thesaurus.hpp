#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace crs {

/// term -> ordered alternatives, read from `term<TAB>alt1|alt2|...`.
/// Terms are lowercase; both terms and alternatives may span several words.
class Thesaurus {
public:
    static Thesaurus load(std::istream& in);
    static Thesaurus load_file(const std::string& path);

    void add(std::string term, std::vector<std::string> alternatives);
    /// Null when the term has no entry.
    const std::vector<std::string>* lookup(std::string_view term) const;
    std::size_t size() const noexcept { return entries_.size(); }
    const std::unordered_map<std::string, std::vector<std::string>>& entries() const noexcept { return entries_; }

private:
    std::unordered_map<std::string, std::vector<std::string>> entries_;
};

/// One lowercase term per line, '#' comments.
class WordList {
public:
    static WordList load(std::istream& in);
    static WordList load_file(const std::string& path);

    void add(std::string term) { words_.insert(std::move(term)); }
    bool contains(std::string_view term) const { return words_.count(std::string(term)) > 0; }
    std::size_t size() const noexcept { return words_.size(); }

private:
    std::unordered_set<std::string> words_;
};

}  // namespace crs
