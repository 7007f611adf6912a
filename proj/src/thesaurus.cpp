#include "crs/thesaurus.hpp"

#include "crs/error.hpp"
#include "crs/io.hpp"

#include <algorithm>

namespace crs {

namespace {

bool is_lower_term(std::string_view s) {
    return !s.empty() && std::none_of(s.begin(), s.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

}  // namespace

void Thesaurus::add(std::string term, std::vector<std::string> alternatives) {
    if (!is_lower_term(term)) throw Error(ErrorCode::InvalidConfig, "thesaurus term must be lowercase: '" + term + "'");
    alternatives.erase(std::remove(alternatives.begin(), alternatives.end(), std::string()), alternatives.end());
    if (alternatives.empty()) throw Error(ErrorCode::InvalidConfig, "thesaurus entry without alternatives: " + term);
    entries_[std::move(term)] = std::move(alternatives);
}

Thesaurus Thesaurus::load(std::istream& in) {
    Thesaurus t;
    for (auto& row : read_tsv(in, 2, 2)) {
        std::vector<std::string> alts;
        std::string_view rest = row.fields[1];
        while (true) {
            auto bar = rest.find('|');
            alts.emplace_back(rest.substr(0, bar));
            if (bar == std::string_view::npos) break;
            rest.remove_prefix(bar + 1);
        }
        try {
            t.add(row.fields[0], std::move(alts));
        } catch (const Error& e) {
            throw ParseError(row.line, e.what());
        }
    }
    return t;
}

Thesaurus Thesaurus::load_file(const std::string& path) {
    auto in = open_input(path);
    return load(in);
}

const std::vector<std::string>* Thesaurus::lookup(std::string_view term) const {
    auto it = entries_.find(std::string(term));
    return it == entries_.end() ? nullptr : &it->second;
}

WordList WordList::load(std::istream& in) {
    WordList w;
    for (auto& row : read_tsv(in, 1, 1)) {
        if (!is_lower_term(row.fields[0])) throw ParseError(row.line, "word must be lowercase");
        w.add(std::move(row.fields[0]));
    }
    return w;
}

WordList WordList::load_file(const std::string& path) {
    auto in = open_input(path);
    return load(in);
}

}  // namespace crs
