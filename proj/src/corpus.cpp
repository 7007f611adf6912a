#include "crs/corpus.hpp"

#include "crs/error.hpp"
#include "crs/io.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

namespace crs {

std::string_view to_string(Format f) { return f == Format::Csv ? "csv" : "jsonl"; }

Format parse_format(std::string_view name) {
    if (name == "jsonl") return Format::Jsonl;
    if (name == "csv") return Format::Csv;
    throw Error(ErrorCode::UnknownFormat, "unknown corpus format '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- ingest

namespace {

constexpr std::size_t kKeptMessages = 20;
constexpr std::array<std::string_view, 4> kCsvColumns = {"platform", "id", "created_at", "body"};

bool valid_record(const CommentRecord& r, std::string& why) {
    if (r.id.empty()) {
        why = "empty id";
        return false;
    }
    for (const auto* field : {&r.platform, &r.id, &r.created_at, &r.body}) {
        if (!is_valid_utf8(*field)) {
            why = "invalid UTF-8";
            return false;
        }
    }
    return true;
}

// Only ids may arrive as integers.
std::optional<std::string> string_field(const nlohmann::json& j, const char* key, bool required,
                                        bool allow_integer = false) {
    if (!j.contains(key)) return required ? std::nullopt : std::optional<std::string>("");
    const auto& v = j[key];
    if (v.is_string()) return v.get<std::string>();
    if (allow_integer && v.is_number_integer()) return v.dump();
    return std::nullopt;
}

}  // namespace

RecordReader::RecordReader(std::istream& in, Format format) : in_(in), format_(format) {
    if (format_ != Format::Csv) return;
    std::vector<std::string> header;
    bool ok = true;
    if (!read_csv_row(header, ok) || !ok) {
        throw Error(ErrorCode::UnknownFormat, "CSV input needs the header platform,id,created_at,body");
    }
    if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
    for (std::size_t i = 0; i < header.size(); ++i) columns_[header[i]] = i;
    for (auto col : kCsvColumns) {
        if (!columns_.count(std::string(col))) {
            throw Error(ErrorCode::UnknownFormat, "CSV header lacks column '" + std::string(col) + "'");
        }
    }
}

void RecordReader::warn(std::string message) {
    ++warnings_;
    if (messages_.size() < kKeptMessages) messages_.push_back(std::move(message));
}

bool RecordReader::next(CommentRecord& out) { return format_ == Format::Csv ? next_csv(out) : next_jsonl(out); }

bool RecordReader::next_jsonl(CommentRecord& out) {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (!is_valid_utf8(line)) {
            warn("line " + std::to_string(line_) + ": invalid UTF-8");
            continue;
        }
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            warn("line " + std::to_string(line_) + ": not a JSON object");
            continue;
        }
        auto platform = string_field(j, "platform", false);
        auto id = string_field(j, "id", true, true);
        auto created = string_field(j, "created_at", false);
        auto body = string_field(j, "body", true);
        if (!platform || !id || !created || !body) {
            warn("line " + std::to_string(line_) + ": missing or mistyped field");
            continue;
        }
        CommentRecord r{std::move(*platform), std::move(*id), std::move(*created), std::move(*body)};
        std::string why;
        if (!valid_record(r, why)) {
            warn("line " + std::to_string(line_) + ": " + why);
            continue;
        }
        out = std::move(r);
        return true;
    }
    return false;
}

bool RecordReader::read_csv_row(std::vector<std::string>& fields, bool& ok) {
    fields.clear();
    ok = true;
    std::string cur;
    bool quoted = false;       // inside a quoted field
    bool was_quoted = false;   // current field started with a quote
    bool any = false;
    int c;
    while ((c = in_.get()) != EOF) {
        any = true;
        const char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    cur += '"';
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++line_;
                cur += ch;
            }
            continue;
        }
        if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
            was_quoted = false;
        } else if (ch == '\n') {
            ++line_;
            if (!cur.empty() && cur.back() == '\r' && !was_quoted) cur.pop_back();
            fields.push_back(std::move(cur));
            return true;
        } else if (ch == '"') {
            if (cur.empty() && !was_quoted) {
                quoted = true;
                was_quoted = true;
            } else {
                ok = false;
                cur += ch;
            }
        } else if (was_quoted && ch != '\r') {
            ok = false;  // text after a closing quote
            cur += ch;
        } else if (!(was_quoted && ch == '\r')) {
            cur += ch;
        }
    }
    if (!any) return false;
    if (quoted) ok = false;  // unterminated quote
    fields.push_back(std::move(cur));
    return true;
}

bool RecordReader::next_csv(CommentRecord& out) {
    std::vector<std::string> fields;
    bool ok = true;
    while (read_csv_row(fields, ok)) {
        const auto row_line = line_;
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
        if (!ok || fields.size() != columns_.size()) {
            warn("row ending line " + std::to_string(row_line) + ": malformed CSV row");
            continue;
        }
        CommentRecord r{fields[columns_.at("platform")], fields[columns_.at("id")], fields[columns_.at("created_at")],
                        fields[columns_.at("body")]};
        std::string why;
        if (!valid_record(r, why)) {
            warn("row ending line " + std::to_string(row_line) + ": " + why);
            continue;
        }
        out = std::move(r);
        return true;
    }
    return false;
}

std::vector<CommentRecord> read_records(std::istream& in, Format format, std::size_t* warnings) {
    RecordReader reader(in, format);
    std::vector<CommentRecord> out;
    CommentRecord r;
    while (reader.next(r)) out.push_back(std::move(r));
    if (warnings) *warnings = reader.warnings();
    return out;
}

void write_record_jsonl(std::ostream& out, const CommentRecord& r) {
    nlohmann::ordered_json j = {{"platform", r.platform}, {"id", r.id}, {"created_at", r.created_at}, {"body", r.body}};
    out << j.dump() << '\n';
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<CommentRecord>& records) {
    out << "platform,id,created_at,body\n";
    for (const auto& r : records) {
        out << csv_field(r.platform) << ',' << csv_field(r.id) << ',' << csv_field(r.created_at) << ','
            << csv_field(r.body) << '\n';
    }
}

// ---------------------------------------------------------------- sampling

Sampler::Sampler(double fraction, std::uint64_t seed) : fraction_(fraction), rng_(seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw Error(ErrorCode::InvalidFraction, "sampling fraction must be in (0, 1]");
    }
}

bool Sampler::keep() { return rng_.unit() < fraction_; }

bool TimeRange::contains(std::string_view created_at) const {
    if (!bounded()) return true;
    if (created_at.empty()) return false;
    if (from && created_at < std::string_view(*from)) return false;
    // A date-only upper bound covers the whole day.
    if (to && created_at > std::string_view(*to) && created_at.substr(0, to->size()) != *to) return false;
    return true;
}

// ---------------------------------------------------------------- statistics

double prevalence_rate(std::uint64_t offensive, std::uint64_t total) {
    if (total == 0 || offensive > total) {
        throw Error(ErrorCode::InvalidCounts,
                    "need 1 <= total and offensive <= total, got " + std::to_string(offensive) + "/" + std::to_string(total));
    }
    // hundredths of a percent, half-up: floor((2 * 10000 * off + total) / (2 * total))
    const unsigned __int128 num = static_cast<unsigned __int128>(offensive) * 20000u + total;
    const unsigned __int128 den = static_cast<unsigned __int128>(total) * 2u;
    const auto hundredths = static_cast<std::uint64_t>(num / den);
    return static_cast<double>(hundredths) / 100.0;
}

std::map<OffenceClass, double> class_breakdown(const std::vector<OffensiveRecord>& exported) {
    if (exported.empty()) throw Error(ErrorCode::EmptyExport, "no offensive records");
    std::map<OffenceClass, double> out;
    for (auto c : kAllClasses) {
        std::size_t n = 0;
        for (const auto& r : exported) n += r.classes.contains(c) ? 1 : 0;
        out[c] = 100.0 * static_cast<double>(n) / static_cast<double>(exported.size());
    }
    return out;
}

namespace {

struct Tally {
    std::size_t total = 0;
    std::size_t offensive = 0;
    std::array<std::size_t, 3> per_class{};
};

CorpusStats stats_from(const std::string& platform, const Tally& t) {
    CorpusStats s;
    s.platform = platform;
    s.total = t.total;
    s.offensive = t.offensive;
    s.rate = t.total ? prevalence_rate(t.offensive, t.total) : 0.0;
    for (std::size_t c = 0; c < kAllClasses.size(); ++c) {
        ClassShare share{t.per_class[c], 0.0};
        if (t.offensive) share.percent = 100.0 * static_cast<double>(t.per_class[c]) / static_cast<double>(t.offensive);
        s.per_class[kAllClasses[c]] = share;
    }
    return s;
}

class Scanner {
public:
    Scanner(const EngineContext& ctx, const ScanOptions& opts) : ctx_(ctx), opts_(opts) {
        if (opts.fraction) sampler_.emplace(*opts.fraction, opts.seed);
    }

    void feed(const CommentRecord& r) {
        if (!opts_.range.contains(r.created_at)) return;
        if (sampler_ && !sampler_->keep()) return;
        AnalysisReport report;
        try {
            report = analyze(r.body, ctx_, AnalyzeOptions{opts_.mode, false});
        } catch (const Error&) {
            ++result_.skipped;
            return;
        }
        auto& tally = platforms_[r.platform];
        ++tally.total;
        ++all_.total;
        if (report.verdict != Verdict::Offensive) return;
        ++tally.offensive;
        ++all_.offensive;
        for (std::size_t c = 0; c < kAllClasses.size(); ++c) {
            if (report.classes.contains(kAllClasses[c])) {
                ++tally.per_class[c];
                ++all_.per_class[c];
            }
        }
        result_.exported.push_back({r.id, r.platform, r.body, report.classes, report.score.value, report.matches});
    }

    ScanResult finish(std::size_t ingest_warnings) {
        result_.skipped += ingest_warnings;
        result_.overall = stats_from("all", all_);
        for (const auto& [platform, tally] : platforms_) result_.per_platform.push_back(stats_from(platform, tally));
        std::sort(result_.exported.begin(), result_.exported.end(), [](const auto& a, const auto& b) {
            return std::tie(a.id, a.platform) < std::tie(b.id, b.platform);
        });
        return std::move(result_);
    }

private:
    const EngineContext& ctx_;
    const ScanOptions& opts_;
    std::optional<Sampler> sampler_;
    std::map<std::string, Tally> platforms_;
    Tally all_;
    ScanResult result_;
};

}  // namespace

ScanResult scan_corpus(RecordReader& reader, const EngineContext& ctx, const ScanOptions& opts) {
    Scanner scanner(ctx, opts);
    CommentRecord r;
    while (reader.next(r)) scanner.feed(r);
    return scanner.finish(reader.warnings());
}

ScanResult scan_records(const std::vector<CommentRecord>& records, const EngineContext& ctx, const ScanOptions& opts) {
    Scanner scanner(ctx, opts);
    for (const auto& r : records) scanner.feed(r);
    return scanner.finish(0);
}

nlohmann::ordered_json to_json(const CorpusStats& s) {
    nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
    for (const auto& [c, share] : s.per_class) {
        per_class[std::string(to_string(c))] = {{"count", share.count}, {"percent", share.percent}};
    }
    return {{"platform", s.platform}, {"total", s.total},          {"offensive", s.offensive},
            {"rate", s.rate},         {"per_class", std::move(per_class)}};
}

nlohmann::ordered_json to_json(const ScanResult& r) {
    auto platforms = nlohmann::ordered_json::array();
    for (const auto& s : r.per_platform) platforms.push_back(to_json(s));
    return {{"overall", to_json(r.overall)}, {"platforms", std::move(platforms)}, {"skipped", r.skipped}};
}

nlohmann::ordered_json to_json(const OffensiveRecord& r) {
    auto matches = nlohmann::ordered_json::array();
    for (const auto& m : r.matches) matches.push_back(to_json(m));
    return {{"id", r.id},
            {"platform", r.platform},
            {"body", r.body},
            {"classes", r.classes.names()},
            {"score", r.score},
            {"matches", std::move(matches)}};
}

std::string stats_table(const ScanResult& r) {
    std::vector<const CorpusStats*> rows;
    for (const auto& s : r.per_platform) rows.push_back(&s);
    rows.push_back(&r.overall);

    std::size_t name_w = 8;
    for (const auto* s : rows) name_w = std::max(name_w, s->platform.size());

    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(name_w)) << "platform" << std::right << std::setw(10) << "total"
        << std::setw(11) << "offensive" << std::setw(9) << "rate%";
    for (auto c : kAllClasses) out << std::setw(11) << (std::string(to_string(c)) + "%");
    out << '\n';
    out << std::fixed << std::setprecision(2);
    for (const auto* s : rows) {
        out << std::left << std::setw(static_cast<int>(name_w)) << s->platform << std::right << std::setw(10) << s->total
            << std::setw(11) << s->offensive << std::setw(9) << s->rate;
        for (auto c : kAllClasses) out << std::setw(11) << s->per_class.at(c).percent;
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------- agreement

AnnotationFile AnnotationFile::load(std::istream& in) {
    AnnotationFile f;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw ParseError(lineno, "not a JSON object");
        auto id = string_field(j, "id", true, true);
        if (!id || id->empty()) throw ParseError(lineno, "missing id");
        if (!j.contains("labels") || !j["labels"].is_array()) throw ParseError(lineno, "\"labels\" must be an array");
        std::set<std::string> labels;
        for (const auto& l : j["labels"]) {
            if (!l.is_string()) throw ParseError(lineno, "labels must be strings");
            labels.insert(l.get<std::string>());
        }
        if (!f.labels.emplace(*id, std::vector<std::string>(labels.begin(), labels.end())).second) {
            throw ParseError(lineno, "repeated id '" + *id + "'");
        }
    }
    return f;
}

AnnotationFile AnnotationFile::load_file(const std::string& path) {
    auto in = open_input(path);
    return load(in);
}

namespace {

std::string project(const std::vector<std::string>& labels, const KappaProjection& p) {
    switch (p.kind) {
        case KappaProjection::Kind::Offensive: return labels.empty() ? "0" : "1";
        case KappaProjection::Kind::Class:
            return std::binary_search(labels.begin(), labels.end(), p.label) ? "1" : "0";
        case KappaProjection::Kind::LabelSet: {
            std::string key;
            for (const auto& l : labels) key += l + '\x1f';
            return key;
        }
    }
    return {};
}

}  // namespace

KappaResult cohen_kappa(const AnnotationFile& a, const AnnotationFile& b, const KappaProjection& projection) {
    if (a.labels.size() != b.labels.size()) {
        throw Error(ErrorCode::IdMismatch, "annotators labelled " + std::to_string(a.labels.size()) + " and " +
                                               std::to_string(b.labels.size()) + " items");
    }
    if (a.labels.empty()) throw Error(ErrorCode::IdMismatch, "no annotated items");

    std::map<std::string, std::uint64_t> count_a, count_b;
    std::uint64_t agree = 0;
    auto ib = b.labels.begin();
    for (auto ia = a.labels.begin(); ia != a.labels.end(); ++ia, ++ib) {
        if (ia->first != ib->first) throw Error(ErrorCode::IdMismatch, "id '" + ia->first + "' is not shared");
        auto ca = project(ia->second, projection);
        auto cb = project(ib->second, projection);
        agree += ca == cb ? 1 : 0;
        ++count_a[ca];
        ++count_b[cb];
    }
    const std::uint64_t n = a.labels.size();
    std::uint64_t chance = 0;  // sum over categories of n_a * n_b
    for (const auto& [cat, na] : count_a) {
        auto it = count_b.find(cat);
        if (it != count_b.end()) chance += na * it->second;
    }
    if (chance == n * n) throw Error(ErrorCode::DegenerateMarginals, "chance agreement is 1");

    KappaResult r;
    r.observed_agreement = static_cast<double>(agree) / static_cast<double>(n);
    r.expected_agreement = static_cast<double>(chance) / static_cast<double>(n * n);
    // (n * agree - chance) / (n^2 - chance), exact in the integers
    const auto num = static_cast<double>(static_cast<std::int64_t>(n * agree) - static_cast<std::int64_t>(chance));
    const auto den = static_cast<double>(n * n - chance);
    r.kappa = num / den;
    return r;
}

}  // namespace crs
