#include "ctg/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "ctg/errors.hpp"

namespace ctg {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

bool is_missing_token(const std::string& cell) {
    if (cell.empty()) return true;
    std::string lower;
    for (char c : cell) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return lower == "nan" || lower == "na";
}

// Full-consume float parse; returns false on any trailing garbage.
bool parse_double(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    const char* begin = cell.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + cell.size();
}

// Reads a line and strips one trailing '\r' (tolerated on input; output is LF).
bool get_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // prefer the shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char probe[40];
        std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
        double back = std::strtod(probe, nullptr);
        if (back == v) return probe;
    }
    return buf;
}

}  // namespace

std::string to_string(Delivery d) {
    return d == Delivery::vaginal ? "vaginal" : "caesarean";
}

std::string to_string(Annotation a) {
    switch (a) {
        case Annotation::acidosis: return "acidosis";
        case Annotation::deterioration: return "deterioration";
        case Annotation::no_pathology_evidence: return "no_pathology_evidence";
        case Annotation::normal: return "normal";
    }
    return "normal";
}

std::string to_string(Label l) {
    return l == Label::case_ ? "case" : "control";
}

Delivery delivery_from_string(const std::string& s) {
    if (s == "vaginal") return Delivery::vaginal;
    if (s == "caesarean") return Delivery::caesarean;
    throw data_error("delivery_from_string: unknown delivery '" + s + "'");
}

Label label_from_string(const std::string& s) {
    if (s == "case") return Label::case_;
    if (s == "control") return Label::control;
    throw data_error("label_from_string: unknown label '" + s + "'");
}

Record parse_record(std::istream& text, const std::string& id) {
    std::string line;
    if (!get_line(text, line)) {
        throw data_error("parse_record(" + id + "): empty input, missing header at line 1");
    }
    const std::string header = trim(line);
    bool has_uc = false;
    if (header == "fhr") {
        has_uc = false;
    } else if (header == "fhr,uc") {
        has_uc = true;
    } else {
        throw data_error("parse_record(" + id + "): malformed header at line 1: '" + header + "'");
    }

    Record rec;
    rec.id = id;
    if (has_uc) rec.uc.emplace();

    std::size_t row = 0;
    while (get_line(text, line)) {
        if (line.empty() && text.peek() == EOF) break;  // trailing newline
        ++row;
        const auto fields = split_csv_line(line);
        const std::size_t expected = has_uc ? 2u : 1u;
        if (fields.size() != expected) {
            throw data_error("parse_record(" + id + "): row " + std::to_string(row) +
                             " has " + std::to_string(fields.size()) + " columns, expected " +
                             std::to_string(expected));
        }
        const std::string fhr_cell = trim(fields[0]);
        double v = 0.0;
        if (is_missing_token(fhr_cell)) {
            v = 0.0;  // missing marker; preprocess repairs it
        } else if (!parse_double(fhr_cell, v)) {
            throw data_error("parse_record(" + id + "): unparseable fhr value '" + fhr_cell +
                             "' at row " + std::to_string(row));
        } else if (!std::isfinite(v)) {
            v = 0.0;
        }
        rec.fhr.push_back(v);
        if (has_uc) {
            const std::string uc_cell = trim(fields[1]);
            double u = 0.0;
            if (is_missing_token(uc_cell)) {
                u = 0.0;
            } else if (!parse_double(uc_cell, u)) {
                throw data_error("parse_record(" + id + "): unparseable uc value '" + uc_cell +
                                 "' at row " + std::to_string(row));
            }
            rec.uc->push_back(u);
        }
    }
    return rec;
}

Record load_record_file(const std::filesystem::path& path, const std::string& id) {
    std::ifstream in(path);
    if (!in) {
        throw data_error("load_record_file(" + id + "): cannot open '" + path.string() + "'");
    }
    return parse_record(in, id);
}

void write_record_csv(std::ostream& out, const Record& rec) {
    if (rec.uc) {
        out << "fhr,uc\n";
        for (std::size_t i = 0; i < rec.fhr.size(); ++i) {
            out << format_double(rec.fhr[i]) << ',' << format_double((*rec.uc)[i]) << '\n';
        }
    } else {
        out << "fhr\n";
        for (double v : rec.fhr) out << format_double(v) << '\n';
    }
}

std::pair<Label, Annotation> label_record(const RecordMeta& meta) {
    // pH plausibility band: umbilical arterial values outside (6.5, 7.8)
    // indicate a conversion or transcription fault.
    if (!(meta.ph > 6.5 && meta.ph < 7.8)) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.4g", meta.ph);
        throw data_error(std::string("label_record: pH ") + buf +
                         " outside plausibility band (6.5, 7.8)");
    }
    if (meta.delivery == Delivery::vaginal) {
        return {Label::control, Annotation::normal};
    }
    if (meta.ph <= 7.20) return {Label::case_, Annotation::acidosis};
    if (meta.ph <= 7.25) return {Label::case_, Annotation::deterioration};
    return {Label::case_, Annotation::no_pathology_evidence};
}

DatasetManifest parse_manifest(std::istream& in) {
    std::string line;
    if (!get_line(in, line)) {
        throw data_error("parse_manifest: empty input");
    }
    if (trim(line) != "id,path,delivery,ph") {
        throw data_error("parse_manifest: malformed header at line 1: '" + trim(line) + "'");
    }
    DatasetManifest m;
    std::size_t row = 0;
    while (get_line(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const auto fields = split_csv_line(line);
        if (fields.size() != 4) {
            throw data_error("parse_manifest: row " + std::to_string(row) + " has " +
                             std::to_string(fields.size()) + " columns, expected 4");
        }
        ManifestEntry e;
        e.id = trim(fields[0]);
        e.path = trim(fields[1]);
        e.delivery = delivery_from_string(trim(fields[2]));
        if (!parse_double(trim(fields[3]), e.ph)) {
            throw data_error("parse_manifest: unparseable pH '" + trim(fields[3]) +
                             "' at row " + std::to_string(row));
        }
        if (e.id.empty()) {
            throw data_error("parse_manifest: empty id at row " + std::to_string(row));
        }
        m.entries.push_back(std::move(e));
    }
    return m;
}

DatasetManifest load_manifest_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw data_error("load_manifest_file: cannot open '" + path.string() + "'");
    }
    return parse_manifest(in);
}

Dataset load_dataset(const DatasetManifest& manifest, const std::filesystem::path& base_dir) {
    std::set<std::string> seen;
    for (const auto& e : manifest.entries) {
        if (!seen.insert(e.id).second) {
            throw data_error("load_dataset: duplicate record id '" + e.id + "'");
        }
    }

    Dataset ds;
    ds.records.reserve(manifest.entries.size());
    for (const auto& e : manifest.entries) {
        std::filesystem::path p(e.path);
        if (p.is_relative()) p = base_dir / p;
        Record rec = load_record_file(p, e.id);
        rec.meta.ph = e.ph;
        rec.meta.delivery = e.delivery;
        auto [label, annotation] = label_record(rec.meta);
        rec.meta.annotation = annotation;
        rec.label = label;
        ds.records.push_back(std::move(rec));
    }

    ds.summary.total = ds.records.size();
    for (const auto& r : ds.records) {
        if (r.label == Label::case_) {
            ++ds.summary.cases;
        } else {
            ++ds.summary.controls;
        }
    }
    return ds;
}

}  // namespace ctg
