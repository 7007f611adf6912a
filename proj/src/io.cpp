#include "crs/io.hpp"

#include "crs/error.hpp"

#include <cstdio>
#include <sstream>

namespace crs {

std::vector<TsvRow> read_tsv(std::istream& in, std::size_t min_fields, std::size_t max_fields) {
    std::vector<TsvRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;

        TsvRow row;
        row.line = line_no;
        std::size_t pos = 0;
        while (true) {
            auto tab = line.find('\t', pos);
            row.fields.push_back(line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
            if (tab == std::string::npos) break;
            pos = tab + 1;
        }
        if (row.fields.size() < min_fields || row.fields.size() > max_fields) {
            throw ParseError(line_no, "expected " + std::to_string(min_fields) +
                                          (min_fields == max_fields ? "" : "-" + std::to_string(max_fields)) +
                                          " tab-separated fields, got " + std::to_string(row.fields.size()));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::UnreadableSource, "cannot open " + path.string());
    return in;
}

std::string read_file(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

}  // namespace crs
