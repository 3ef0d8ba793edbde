#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "scqm/datagen.hpp"
#include "scqm/loss.hpp"
#include "scqm/optimizer.hpp"
#include "scqm/quadmap.hpp"
#include "scqm/types.hpp"

namespace scqm {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

// CSV with one header row; table rows map to file rows.
void write_csv(const std::string& path, const Matrix& table,
               const std::vector<std::string>& header);
// Reads a CSV; a first line that does not fully parse as numbers is treated
// as the header. Returns rows x cols.
Matrix read_csv(const std::string& path, std::vector<std::string>* header = nullptr);

// data.csv (one sample per row), data_clean.csv when ground truth exists,
// meta.json with generator name, parameters and seed.
void write_dataset(const std::string& dir, const Dataset& ds);
// Reads a samples-in-rows CSV into Dataset.X (D x n). Ground truth is loaded
// from <stem>_clean.csv next to the file when present.
Dataset read_dataset_csv(const std::string& path);

// Model JSON: dims, c, Q flat column-major, Theta flat row-major, loss
// string, and the vech ordering tag "rowmajor-upper". Round-trips doubles
// bit-faithfully.
void save_model(const std::string& path, const QuadraticModel& model,
                const LossSpec& loss);
std::pair<QuadraticModel, LossSpec> load_model(const std::string& path);

void write_trace_csv(const std::string& path, const FitTrace& trace);

// Flat key = value config files; '#' comments and [section] lines are skipped.
std::map<std::string, std::string> read_config(const std::string& path);
void write_config(const std::string& path,
                  const std::map<std::string, std::string>& kv);
// Applies known FitConfig keys, ignoring others (they may belong to the
// caller); throws on unparsable values.
void apply_fit_config(FitConfig& cfg, const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> fit_config_to_map(const FitConfig& cfg);

}  // namespace scqm
