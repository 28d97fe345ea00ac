#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "medoidnet/sample.hpp"
#include "medoidnet/space.hpp"

namespace medoidnet {

/// A dataset CSV before its cells are interpreted by a space.
///
/// Header: numeric instance columns prefixed `x_`, or a single `x_id`
/// column of element names, and an optional `y` column.
struct RawDataset {
  std::string source;  ///< path or "<stream>", used in diagnostics
  std::vector<std::string> x_columns;
  bool symbolic_instances = false;  ///< true for an x_id column
  bool has_labels = false;
  std::vector<std::vector<std::string>> x_cells;
  std::vector<std::string> y_cells;
  std::vector<std::size_t> line_numbers;  ///< 1-based source line of each row
  bool empty_file = false;                ///< no header at all

  std::size_t size() const { return x_cells.size(); }
};

RawDataset parse_dataset(std::istream& in, const std::string& source = "<stream>");
/// Throws IoError naming the path when the file cannot be opened.
RawDataset read_dataset(const std::filesystem::path& path);

/// "real" or "l2-d" for x_ columns; a discrete space over the x_id names in
/// order of first appearance otherwise.
SpaceHandle infer_instance_space(const RawDataset& data);
/// "real" when every label is numeric, otherwise a discrete space over the
/// label names in order of first appearance.
SpaceHandle infer_label_space(const RawDataset& data);

/// Cell interpretation; a cell the space rejects raises FormatError with its
/// line number.
std::vector<Element> dataset_instances(const RawDataset& data, const MetricSpace& X);
LabeledSample dataset_sample(const RawDataset& data, const MetricSpace& X, const MetricSpace& Y);

/// Writes a sample in the dataset format (x_id for symbolic instance spaces).
void write_dataset(const LabeledSample& sample, const MetricSpace& X, const MetricSpace& Y,
                   std::ostream& out);

}  // namespace medoidnet
