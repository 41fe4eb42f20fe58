#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ctg {

// FHR sampling rate of the source recordings, samples per second.
inline constexpr double kSampleHz = 4.0;

enum class Delivery { vaginal, caesarean };
enum class Annotation { acidosis, deterioration, no_pathology_evidence, normal };
enum class Label : int { control = 0, case_ = 1 };

std::string to_string(Delivery d);
std::string to_string(Annotation a);
std::string to_string(Label l);
Delivery delivery_from_string(const std::string& s);
Label label_from_string(const std::string& s);

struct RecordMeta {
    double ph = 0.0;  // umbilical arterial pH
    Delivery delivery = Delivery::vaginal;
    Annotation annotation = Annotation::normal;
};

/// One pregnancy's FHR trace plus outcome metadata. Immutable once built;
/// safe to share across threads.
struct Record {
    std::string id;
    std::vector<double> fhr;                  // beats per minute at 4 Hz
    std::optional<std::vector<double>> uc;    // kept for provenance, never modelled
    RecordMeta meta;
    Label label = Label::control;

    std::size_t length() const { return fhr.size(); }
};

struct ManifestEntry {
    std::string id;
    std::string path;
    Delivery delivery = Delivery::vaginal;
    double ph = 0.0;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::uint64_t seed = 0;
};

struct DatasetSummary {
    std::size_t total = 0;
    std::size_t cases = 0;
    std::size_t controls = 0;
};

struct Dataset {
    std::vector<Record> records;
    DatasetSummary summary;
};

/// Parse one record from CSV text (header `fhr` or `fhr,uc`, one float per
/// row). Empty or nan-valued fhr cells become the 0.0 missing marker; other
/// non-numeric cells are format errors.
Record parse_record(std::istream& text, const std::string& id);

Record load_record_file(const std::filesystem::path& path, const std::string& id);

/// Shortest-round-trip formatting, so parse(write(r)) == r.
void write_record_csv(std::ostream& out, const Record& rec);

/// Case/control label and outcome annotation from delivery mode and pH.
std::pair<Label, Annotation> label_record(const RecordMeta& meta);

DatasetManifest parse_manifest(std::istream& in);
DatasetManifest load_manifest_file(const std::filesystem::path& path);

/// Load, label and count every record in the manifest. Relative record paths
/// resolve against base_dir.
Dataset load_dataset(const DatasetManifest& manifest, const std::filesystem::path& base_dir);

}  // namespace ctg
