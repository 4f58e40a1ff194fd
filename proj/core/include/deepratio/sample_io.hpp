#pragma once

#include <filesystem>
#include <string>

#include "deepratio/sample.hpp"

namespace deepratio::io {

/// Event table, header `time,type,mark,x0,x1,...,y` (y0,y1,... when d_y > 1),
/// 17 significant digits.
void write_events_csv(const MarkedPointSample& sample, const std::filesystem::path& path);

/// Sidecar JSON: source, horizon, seed, layout and counts per (type, mark).
void write_metadata(const MarkedPointSample& sample, const std::filesystem::path& path);

/// Covariate path snapshot, header `t,x0,...,y`.
void write_covariate_grid(const MarkedPointSample& sample, const std::filesystem::path& path);

/// Writes `<stem>.csv`, `<stem>.json` and, when recorded, `<stem>_grid.csv`.
void save_sample(const MarkedPointSample& sample, const std::filesystem::path& stem);

/// Inverse of save_sample; the metadata file supplies layout and horizon.
MarkedPointSample load_sample(const std::filesystem::path& stem);

}  // namespace deepratio::io
