#include "usmb/series_io.hpp"

#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <utility>

#include <json.hpp>

namespace usmb {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

IngestError::IngestError(fs::path path_, std::size_t line_, const std::string& what_)
    : std::runtime_error(path_.string() +
                         (line_ > 0 ? ":" + std::to_string(line_) : std::string{}) + ": " + what_),
      path(std::move(path_)),
      line(line_) {}

namespace {

fs::path with_suffix(const fs::path& base, const char* suffix) {
    fs::path p = base;
    p += suffix;
    return p;
}

const char* placement_name(NoisePlacement p) {
    switch (p) {
        case NoisePlacement::PreFold: return "pre-fold";
        case NoisePlacement::PostFold: return "post-fold";
        case NoisePlacement::PostFoldRefolded: return "post-fold-refolded";
    }
    return "post-fold";
}

NoisePlacement placement_from(const std::string& s, const fs::path& path) {
    if (s == "pre-fold") return NoisePlacement::PreFold;
    if (s == "post-fold") return NoisePlacement::PostFold;
    if (s == "post-fold-refolded") return NoisePlacement::PostFoldRefolded;
    throw IngestError(path, 0, "unknown noise placement \"" + s + "\"");
}

double parse_field(const std::string& text, const fs::path& path, std::size_t line,
                   const char* what) {
    const char* begin = text.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || end != begin + text.size())
        throw IngestError(path, line, std::string("malformed ") + what + " \"" + text + "\"");
    if (!std::isfinite(v)) throw IngestError(path, line, std::string(what) + " is not finite");
    return v;
}

ordered_json header_for(const ComplexSeries& s, const std::optional<ModuloConfig>& fold) {
    ordered_json j;
    j["format"] = "usmb-series";
    j["version"] = 1;
    j["kind"] = fold ? "folded" : "complex";
    j["sample_period"] = s.sample_period;
    j["start_index"] = s.start_index;
    j["length"] = s.samples.size();
    if (fold) {
        ordered_json fj;
        fj["lambda"] = fold->threshold;
        fj["bit_depth"] = fold->bit_depth ? ordered_json(*fold->bit_depth) : ordered_json(nullptr);
        fj["noise_snr_db"] =
            fold->noise_snr_db ? ordered_json(*fold->noise_snr_db) : ordered_json(nullptr);
        fj["noise_seed"] = fold->noise_seed;
        fj["noise_placement"] = placement_name(fold->noise_placement);
        j["fold"] = std::move(fj);
    }
    return j;
}

void write_payload(const ComplexSeries& s, const std::optional<ModuloConfig>& fold,
                   const fs::path& base) {
    fs::path csv_path = with_suffix(base, ".csv");
    std::ofstream csv(csv_path, std::ios::trunc);
    if (!csv) throw IngestError(csv_path, 0, "cannot open for writing");
    csv << "k,t,re,im\n";
    char row[160];
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
        std::int64_t k = s.start_index + static_cast<std::int64_t>(i);
        double t = static_cast<double>(k) * s.sample_period;
        std::snprintf(row, sizeof row, "%" PRId64 ",%s,%s,%s\n", k, format_double(t).c_str(),
                      format_double(s.samples[i].real()).c_str(),
                      format_double(s.samples[i].imag()).c_str());
        csv << row;
    }
    if (!csv.good()) throw IngestError(csv_path, 0, "write failed");

    fs::path json_path = with_suffix(base, ".json");
    std::ofstream meta(json_path, std::ios::trunc);
    if (!meta) throw IngestError(json_path, 0, "cannot open for writing");
    meta << header_for(s, fold).dump(2) << "\n";
    if (!meta.good()) throw IngestError(json_path, 0, "write failed");
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_series(const ComplexSeries& x, const fs::path& base) {
    write_payload(x, std::nullopt, base);
}

void write_series(const FoldedSeries& y, const fs::path& base) {
    write_payload(y.series, y.config, base);
}

SeriesFile read_series(const fs::path& base) {
    fs::path json_path = with_suffix(base, ".json");
    std::ifstream meta(json_path);
    if (!meta) throw IngestError(json_path, 0, "cannot open");
    ordered_json j;
    try {
        j = ordered_json::parse(meta);
    } catch (const ordered_json::parse_error& e) {
        throw IngestError(json_path, 0, std::string("malformed JSON: ") + e.what());
    }

    auto require = [&](const char* key) -> const ordered_json& {
        if (!j.contains(key)) throw IngestError(json_path, 0, std::string("missing key ") + key);
        return j.at(key);
    };
    try {
        if (require("format").get<std::string>() != "usmb-series")
            throw IngestError(json_path, 0, "not a series file");
        if (require("version").get<int>() != 1)
            throw IngestError(json_path, 0, "unsupported version");
        std::string kind = require("kind").get<std::string>();
        if (kind != "complex" && kind != "folded")
            throw IngestError(json_path, 0, "unknown kind \"" + kind + "\"");

        SeriesFile file;
        file.series.sample_period = require("sample_period").get<double>();
        file.series.start_index = require("start_index").get<std::int64_t>();
        std::size_t length = require("length").get<std::size_t>();
        if (!(file.series.sample_period > 0.0))
            throw IngestError(json_path, 0, "sample_period must be positive");

        if (kind == "folded") {
            const ordered_json& fj = require("fold");
            ModuloConfig cfg;
            if (!fj.contains("lambda")) throw IngestError(json_path, 0, "missing key fold.lambda");
            cfg.threshold = fj.at("lambda").get<double>();
            if (fj.contains("bit_depth") && !fj.at("bit_depth").is_null())
                cfg.bit_depth = fj.at("bit_depth").get<int>();
            if (fj.contains("noise_snr_db") && !fj.at("noise_snr_db").is_null())
                cfg.noise_snr_db = fj.at("noise_snr_db").get<double>();
            if (fj.contains("noise_seed"))
                cfg.noise_seed = fj.at("noise_seed").get<std::uint64_t>();
            if (fj.contains("noise_placement"))
                cfg.noise_placement =
                    placement_from(fj.at("noise_placement").get<std::string>(), json_path);
            try {
                cfg.validate();
            } catch (const std::invalid_argument& e) {
                throw IngestError(json_path, 0, e.what());
            }
            file.fold = cfg;
        }

        fs::path csv_path = with_suffix(base, ".csv");
        std::ifstream csv(csv_path);
        if (!csv) throw IngestError(csv_path, 0, "cannot open");

        std::string line;
        if (!std::getline(csv, line)) throw IngestError(csv_path, 1, "missing header row");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line != "k,t,re,im")
            throw IngestError(csv_path, 1, "unexpected header \"" + line + "\"");

        // Folded samples must sit inside [-lambda, lambda]; additive post-fold
        // noise legitimately escapes the interval, so the range check is
        // skipped when the header declares unfolded noise.
        bool range_checked =
            file.fold && !(file.fold->noise_snr_db &&
                           file.fold->noise_placement == NoisePlacement::PostFold);
        double limit = file.fold ? file.fold->threshold * (1.0 + 1e-12) : 0.0;

        file.series.samples.reserve(length);
        std::size_t line_no = 1;
        while (std::getline(csv, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;

            std::array<std::string, 4> fields;
            std::size_t field = 0, pos = 0;
            while (field < 4) {
                std::size_t comma = line.find(',', pos);
                if (comma == std::string::npos) {
                    fields[field++] = line.substr(pos);
                    pos = line.size();
                    break;
                }
                fields[field++] = line.substr(pos, comma - pos);
                pos = comma + 1;
            }
            if (field != 4 || pos != line.size())
                throw IngestError(csv_path, line_no, "expected 4 comma-separated fields");

            double kf = parse_field(fields[0], csv_path, line_no, "index");
            std::int64_t expect =
                file.series.start_index + static_cast<std::int64_t>(file.series.samples.size());
            if (kf != static_cast<double>(expect))
                throw IngestError(csv_path, line_no, "index out of sequence");
            parse_field(fields[1], csv_path, line_no, "timestamp");
            double re = parse_field(fields[2], csv_path, line_no, "real part");
            double im = parse_field(fields[3], csv_path, line_no, "imaginary part");
            if (range_checked && (std::abs(re) > limit || std::abs(im) > limit))
                throw IngestError(csv_path, line_no, "sample outside the declared fold range");
            file.series.samples.push_back(cplx{re, im});
        }
        if (file.series.samples.size() != length)
            throw IngestError(csv_path, line_no,
                              "row count does not match declared length " +
                                  std::to_string(length));
        return file;
    } catch (const ordered_json::exception& e) {
        throw IngestError(json_path, 0, std::string("malformed header: ") + e.what());
    }
}

void write_taps(const FilterTaps& f, const fs::path& path) {
    ordered_json j;
    j["format"] = "usmb-taps";
    j["version"] = 1;
    j["carriers_rad_s"] = f.carriers;
    j["sample_period"] = f.sample_period;
    j["order"] = f.order;
    j["normalized"] = f.normalized;
    j["normalizer"] = {{"re", f.normalizer.real()}, {"im", f.normalizer.imag()}};
    ordered_json taps = ordered_json::array();
    for (const cplx& t : f.taps) taps.push_back({{"re", t.real()}, {"im", t.imag()}});
    j["taps"] = std::move(taps);

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IngestError(path, 0, "cannot open for writing");
    out << j.dump(2) << "\n";
    if (!out.good()) throw IngestError(path, 0, "write failed");
}

FilterTaps read_taps(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError(path, 0, "cannot open");
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const ordered_json::parse_error& e) {
        throw IngestError(path, 0, std::string("malformed JSON: ") + e.what());
    }
    try {
        auto require = [&](const char* key) -> const ordered_json& {
            if (!j.contains(key)) throw IngestError(path, 0, std::string("missing key ") + key);
            return j.at(key);
        };
        if (require("format").get<std::string>() != "usmb-taps")
            throw IngestError(path, 0, "not a filter file");
        if (require("version").get<int>() != 1) throw IngestError(path, 0, "unsupported version");

        FilterTaps f;
        f.carriers = require("carriers_rad_s").get<std::vector<double>>();
        f.sample_period = require("sample_period").get<double>();
        f.order = require("order").get<int>();
        f.normalized = require("normalized").get<bool>();
        const ordered_json& nj = require("normalizer");
        f.normalizer = cplx{nj.at("re").get<double>(), nj.at("im").get<double>()};
        for (const ordered_json& tj : require("taps"))
            f.taps.emplace_back(tj.at("re").get<double>(), tj.at("im").get<double>());
        if (f.taps.empty()) throw IngestError(path, 0, "filter has no taps");
        if (!(f.sample_period > 0.0)) throw IngestError(path, 0, "sample_period must be positive");
        if (f.order < 1) throw IngestError(path, 0, "order must be at least 1");
        return f;
    } catch (const ordered_json::exception& e) {
        throw IngestError(path, 0, std::string("malformed filter file: ") + e.what());
    }
}

void write_recovery_report(const RecoveryResult& result, const RecoveryParams& params,
                           const fs::path& path) {
    ordered_json j;
    j["format"] = "usmb-recovery";
    j["version"] = 1;
    j["lambda"] = params.lambda;
    j["beta"] = params.beta;
    j["order"] = result.diagnostics.order_used;
    j["warmup"] = result.diagnostics.warmup_used;
    j["corrections"] = result.diagnostics.corrections;
    j["max_filtered_prefix"] = result.diagnostics.max_filtered_prefix;
    j["max_lattice_deviation"] = result.diagnostics.max_lattice_deviation;
    j["fold_indices"] = result.fold_indices;

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IngestError(path, 0, "cannot open for writing");
    out << j.dump(2) << "\n";
    if (!out.good()) throw IngestError(path, 0, "write failed");
}

}  // namespace usmb
