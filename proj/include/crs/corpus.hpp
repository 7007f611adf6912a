#pragma once

#include "crs/pipeline.hpp"
#include "crs/random.hpp"
#include "crs/types.hpp"

#include "json.hpp"

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace crs {

/// Canonical comment record; JSONL {"platform","id","created_at","body"}.
struct CommentRecord {
    std::string platform;
    std::string id;
    std::string created_at;  ///< ISO-8601, may be empty
    std::string body;

    friend bool operator==(const CommentRecord&, const CommentRecord&) = default;
};

enum class Format { Jsonl, Csv };
std::string_view to_string(Format f);
/// Throws Error(UnknownFormat).
Format parse_format(std::string_view name);

/// Streaming reader. Malformed or non-UTF-8 records are skipped and counted.
class RecordReader {
public:
    /// Throws Error(UnknownFormat) when a CSV stream lacks the mandatory
    /// header platform,id,created_at,body.
    RecordReader(std::istream& in, Format format);

    /// False at end of input.
    bool next(CommentRecord& out);

    std::size_t warnings() const noexcept { return warnings_; }
    /// The first few warning messages, for diagnostics.
    const std::vector<std::string>& warning_messages() const noexcept { return messages_; }

private:
    bool next_jsonl(CommentRecord& out);
    bool next_csv(CommentRecord& out);
    bool read_csv_row(std::vector<std::string>& fields, bool& ok);
    void warn(std::string message);

    std::istream& in_;
    Format format_;
    std::size_t line_ = 0;
    std::size_t warnings_ = 0;
    std::vector<std::string> messages_;
    std::map<std::string, std::size_t> columns_;
};

/// Whole-stream convenience.
std::vector<CommentRecord> read_records(std::istream& in, Format format, std::size_t* warnings = nullptr);

void write_record_jsonl(std::ostream& out, const CommentRecord& r);
/// Header once, then RFC 4180 rows.
void write_records_csv(std::ostream& out, const std::vector<CommentRecord>& records);

/// Keeps each record independently with probability `fraction`.
class Sampler {
public:
    /// Throws Error(InvalidFraction) unless fraction is in (0, 1].
    Sampler(double fraction, std::uint64_t seed);
    bool keep();

private:
    double fraction_;
    Rng rng_;
};

/// Inclusive range over ISO-8601 created_at strings, compared as text.
/// Records without a timestamp fall outside any bounded range.
struct TimeRange {
    std::optional<std::string> from;
    std::optional<std::string> to;

    bool bounded() const noexcept { return from || to; }
    bool contains(std::string_view created_at) const;
};

/// 100 * offensive / total, rounded half-up to 2 decimals in exact integer
/// arithmetic. Throws Error(InvalidCounts) unless 1 <= total and offensive <= total.
double prevalence_rate(std::uint64_t offensive, std::uint64_t total);

struct ClassShare {
    std::size_t count = 0;
    double percent = 0.0;  ///< of the offensive records
};

struct CorpusStats {
    std::string platform;
    std::size_t total = 0;
    std::size_t offensive = 0;
    double rate = 0.0;  ///< percent, 2 decimals
    std::map<OffenceClass, ClassShare> per_class;
};

struct OffensiveRecord {
    std::string id;
    std::string platform;
    std::string body;
    ClassSet classes;
    double score = 0.0;
    std::vector<RuleMatch> matches;
};

/// percent = 100 * class_count / offensive_count; sums may exceed 100.
/// Throws Error(EmptyExport).
std::map<OffenceClass, double> class_breakdown(const std::vector<OffensiveRecord>& exported);

struct ScanOptions {
    std::optional<Mode> mode;
    std::optional<double> fraction;  ///< sample before scanning
    std::uint64_t seed = 42;
    TimeRange range;
};

struct ScanResult {
    CorpusStats overall;                   ///< platform "all"
    std::vector<CorpusStats> per_platform; ///< sorted by platform
    std::vector<OffensiveRecord> exported; ///< sorted by (id, platform)
    std::size_t skipped = 0;               ///< ingest warnings plus records analyze rejected
};

/// Streams the reader through analyze. Only the offensive export is held in
/// memory.
ScanResult scan_corpus(RecordReader& reader, const EngineContext& ctx, const ScanOptions& opts = {});
ScanResult scan_records(const std::vector<CommentRecord>& records, const EngineContext& ctx,
                        const ScanOptions& opts = {});

nlohmann::ordered_json to_json(const CorpusStats& stats);
nlohmann::ordered_json to_json(const ScanResult& result);
nlohmann::ordered_json to_json(const OffensiveRecord& record);
/// Aligned text table: one row per platform plus the total row.
std::string stats_table(const ScanResult& result);

/// Per-annotator labels, one JSONL record {"id": str, "labels": [str]} each.
struct AnnotationFile {
    std::map<std::string, std::vector<std::string>> labels;  ///< labels sorted, unique

    /// Throws ParseError for malformed lines or repeated ids.
    static AnnotationFile load(std::istream& in);
    static AnnotationFile load_file(const std::string& path);
};

/// How each item's label set becomes one category.
struct KappaProjection {
    enum class Kind { Offensive, Class, LabelSet };
    Kind kind = Kind::Offensive;
    std::string label;  ///< for Kind::Class

    static KappaProjection offensive() { return {Kind::Offensive, {}}; }
    static KappaProjection of_class(std::string label) { return {Kind::Class, std::move(label)}; }
    static KappaProjection label_set() { return {Kind::LabelSet, {}}; }
};

struct KappaResult {
    double kappa = 0.0;
    double observed_agreement = 0.0;
    double expected_agreement = 0.0;
};

/// Two-rater Cohen's kappa. Throws Error(IdMismatch) when the id sets differ
/// and Error(DegenerateMarginals) when chance agreement is 1.
KappaResult cohen_kappa(const AnnotationFile& a, const AnnotationFile& b,
                        const KappaProjection& projection = KappaProjection::offensive());

}  // namespace crs
