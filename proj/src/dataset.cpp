#include "medoidnet/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include "medoidnet/errors.hpp"
#include "text.hpp"

namespace medoidnet {

namespace {

[[noreturn]] void fail(const RawDataset& d, std::size_t line, const std::string& what) {
  throw FormatError(d.source + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> first_appearance(const std::vector<std::string>& cells) {
  std::vector<std::string> names;
  for (const auto& c : cells) {
    if (std::find(names.begin(), names.end(), c) == names.end()) names.push_back(c);
  }
  return names;
}

}  // namespace

RawDataset parse_dataset(std::istream& in, const std::string& source) {
  RawDataset d;
  d.source = source;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::vector<std::ptrdiff_t> x_pos;
  std::ptrdiff_t y_pos = -1;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    const auto cells = detail::split(t, ',');
    if (!have_header) {
      have_header = true;
      width = cells.size();
      for (std::size_t j = 0; j < cells.size(); ++j) {
        const std::string name(detail::trim(cells[j]));
        if (name == "y") {
          if (y_pos >= 0) fail(d, lineno, "duplicate y column");
          y_pos = static_cast<std::ptrdiff_t>(j);
        } else if (name == "x_id") {
          d.symbolic_instances = true;
          d.x_columns.push_back(name);
          x_pos.push_back(static_cast<std::ptrdiff_t>(j));
        } else if (name.starts_with("x_")) {
          d.x_columns.push_back(name);
          x_pos.push_back(static_cast<std::ptrdiff_t>(j));
        } else {
          fail(d, lineno, "unexpected column '" + name + "' (expected x_<name>, x_id or y)");
        }
      }
      if (x_pos.empty()) fail(d, lineno, "no instance column (x_<name> or x_id)");
      if (d.symbolic_instances && x_pos.size() != 1) {
        fail(d, lineno, "x_id cannot be combined with other instance columns");
      }
      d.has_labels = y_pos >= 0;
      continue;
    }
    if (cells.size() != width) {
      fail(d, lineno, "expected " + std::to_string(width) + " fields, found " +
                          std::to_string(cells.size()));
    }
    std::vector<std::string> xs;
    for (const auto p : x_pos) {
      const auto c = detail::trim(cells[static_cast<std::size_t>(p)]);
      if (c.empty()) fail(d, lineno, "empty instance field");
      if (!d.symbolic_instances && !detail::parse_double(c)) {
        fail(d, lineno, "non-numeric instance field '" + std::string(c) + "'");
      }
      xs.emplace_back(c);
    }
    d.x_cells.push_back(std::move(xs));
    if (y_pos >= 0) {
      const auto c = detail::trim(cells[static_cast<std::size_t>(y_pos)]);
      if (c.empty()) fail(d, lineno, "empty label field");
      d.y_cells.emplace_back(c);
    }
    d.line_numbers.push_back(lineno);
  }
  d.empty_file = !have_header;
  return d;
}

RawDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  return parse_dataset(in, path.string());
}

SpaceHandle infer_instance_space(const RawDataset& data) {
  if (data.symbolic_instances) {
    std::vector<std::string> cells;
    for (const auto& row : data.x_cells) cells.push_back(row[0]);
    const auto names = first_appearance(cells);
    if (names.empty()) throw PreconditionError(data.source + ": cannot infer a space without rows");
    return discrete(names);
  }
  const auto d = data.x_columns.size();
  return d == 1 ? real_line() : euclidean(d);
}

SpaceHandle infer_label_space(const RawDataset& data) {
  if (!data.has_labels) throw FormatError(data.source + ": dataset has no y column");
  const bool numeric = std::all_of(data.y_cells.begin(), data.y_cells.end(),
                                   [](const std::string& c) { return detail::parse_double(c).has_value(); });
  if (numeric) return real_line();
  return discrete(first_appearance(data.y_cells));
}

std::vector<Element> dataset_instances(const RawDataset& data, const MetricSpace& X) {
  if (data.symbolic_instances != X.symbolic() ||
      (!X.symbolic() && data.x_columns.size() != X.dimension())) {
    throw PreconditionError(data.source + ": instance columns do not match space '" + X.id() + "'");
  }
  std::vector<Element> out;
  out.reserve(data.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    std::string text;
    for (std::size_t j = 0; j < data.x_cells[r].size(); ++j) {
      if (j) text += ';';
      text += data.x_cells[r][j];
    }
    try {
      out.push_back(X.parse(text));
    } catch (const InvalidElement& e) {
      fail(data, data.line_numbers[r], e.what());
    }
  }
  return out;
}

LabeledSample dataset_sample(const RawDataset& data, const MetricSpace& X, const MetricSpace& Y) {
  if (!data.has_labels) throw FormatError(data.source + ": dataset has no y column");
  auto xs = dataset_instances(data, X);
  std::vector<Element> ys;
  ys.reserve(data.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    try {
      ys.push_back(Y.parse(data.y_cells[r]));
    } catch (const InvalidElement& e) {
      fail(data, data.line_numbers[r], e.what());
    }
  }
  return LabeledSample(std::move(xs), std::move(ys));
}

void write_dataset(const LabeledSample& sample, const MetricSpace& X, const MetricSpace& Y,
                   std::ostream& out) {
  if (X.symbolic()) {
    out << "x_id";
  } else {
    for (std::size_t j = 0; j < X.dimension(); ++j) out << (j ? ",x_" : "x_") << j;
  }
  out << ",y\n";
  for (std::size_t i = 0; i < sample.size(); ++i) {
    std::string x = X.format(sample.instance(i));
    std::replace(x.begin(), x.end(), ';', ',');
    out << x << ',' << Y.format(sample.label(i)) << '\n';
  }
}

}  // namespace medoidnet
