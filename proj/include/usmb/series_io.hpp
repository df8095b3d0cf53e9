// On-disk formats: series as <base>.csv (k,t,re,im) plus <base>.json header,
// filter taps and recovery results as JSON. All doubles round-trip bit-exact
// (17 significant digits in CSV, shortest-round-trip in JSON).
#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "usmb/modulo.hpp"
#include "usmb/recovery.hpp"
#include "usmb/spectral_filter.hpp"

namespace usmb {

/// Malformed or inconsistent input file. `line` is 1-based within the CSV
/// (0 when the problem is in the JSON header).
struct IngestError : std::runtime_error {
    IngestError(std::filesystem::path path_, std::size_t line_, const std::string& what_);
    std::filesystem::path path;
    std::size_t line;
};

struct SeriesFile {
    ComplexSeries series;
    std::optional<ModuloConfig> fold;  ///< present when the header declares a folded series
};

/// Writes <base>.csv and <base>.json.
void write_series(const ComplexSeries& x, const std::filesystem::path& base);
void write_series(const FoldedSeries& y, const std::filesystem::path& base);

/// Reads <base>.csv + <base>.json. Validates finiteness, header/row
/// consistency, and for folded series (except post-fold noise captures) the
/// componentwise range |v| <= lambda.
SeriesFile read_series(const std::filesystem::path& base);

void write_taps(const FilterTaps& f, const std::filesystem::path& path);
FilterTaps read_taps(const std::filesystem::path& path);

/// Recovery summary JSON (diagnostics + fold indices); the recovered series
/// itself goes through write_series.
void write_recovery_report(const RecoveryResult& result, const RecoveryParams& params,
                           const std::filesystem::path& path);

/// 17-significant-digit text form that parses back to the same double.
std::string format_double(double v);

}  // namespace usmb
