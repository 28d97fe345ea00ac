#include "medoidnet/space.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "medoidnet/errors.hpp"
#include "text.hpp"

namespace medoidnet {

namespace {

constexpr std::uint64_t kMaxMaterialized = 20'000'000;

std::string describe(const MetricSpace& space) { return "space '" + space.id() + "'"; }

}  // namespace

std::uint64_t MetricSpace::rank(const Element&) const {
  throw UnsupportedOperation(describe(*this) + " has no enumeration");
}

std::vector<Element> MetricSpace::first_elements(std::uint64_t) const {
  throw UnsupportedOperation(describe(*this) + " has no enumeration");
}

std::vector<Element> MetricSpace::eps_net(double) const {
  throw UnsupportedOperation(describe(*this) + " has no eps-net oracle");
}

std::optional<Element> MetricSpace::closest_in_ball(const Element&, const Element&,
                                                    double) const {
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// VectorSpace

VectorSpace::VectorSpace(std::size_t dim, Norm norm, double box_half_width)
    : MetricSpace(dim == 1 ? std::string("real")
                           : (norm == Norm::l1 ? "l1-" : "l2-") + std::to_string(dim)),
      dim_(dim),
      norm_(norm),
      box_(box_half_width) {
  if (dim == 0) throw PreconditionError("vector space dimension must be positive");
  if (!(box_half_width > 0.0)) throw PreconditionError("bounding box half-width must be positive");
}

double VectorSpace::distance(const Element& a, const Element& b) const {
  if (dim_ == 1) return std::abs(a[0] - b[0]);
  double acc = 0.0;
  if (norm_ == Norm::l1) {
    for (std::size_t i = 0; i < dim_; ++i) acc += std::abs(a[i] - b[i]);
    return acc;
  }
  for (std::size_t i = 0; i < dim_; ++i) {
    const double t = a[i] - b[i];
    acc += t * t;
  }
  return std::sqrt(acc);
}

bool VectorSpace::less(const Element& a, const Element& b) const {
  const auto ca = a.coords();
  const auto cb = b.coords();
  return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end());
}

bool VectorSpace::contains(const Element& e) const {
  if (e.size() != dim_) return false;
  const auto c = e.coords();
  return std::all_of(c.begin(), c.end(), [](double v) { return std::isfinite(v); });
}

double VectorSpace::diameter() const { return std::numeric_limits<double>::infinity(); }

std::optional<Element> VectorSpace::anchor() const {
  return Element{std::vector<double>(dim_, 0.0)};
}

std::vector<Element> VectorSpace::eps_net(double eps) const {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw PreconditionError("eps must be positive");
  const double pitch = eps / std::sqrt(static_cast<double>(dim_));
  const auto half = static_cast<std::int64_t>(std::floor(box_ / pitch));
  const auto per_axis = static_cast<std::uint64_t>(2 * half + 1);
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < dim_; ++i) {
    if (total > kMaxMaterialized / per_axis) {
      throw PreconditionError("eps-net of " + describe(*this) + " at eps=" + std::to_string(eps) +
                              " exceeds the materialization limit");
    }
    total *= per_axis;
  }
  std::vector<Element> net;
  net.reserve(total);
  std::vector<std::int64_t> idx(dim_, -half);
  std::vector<double> coords(dim_);
  for (std::uint64_t n = 0; n < total; ++n) {
    for (std::size_t i = 0; i < dim_; ++i) coords[i] = static_cast<double>(idx[i]) * pitch;
    net.emplace_back(coords);
    // Odometer increment, last axis fastest: yields lexicographic order.
    for (std::size_t i = dim_; i-- > 0;) {
      if (++idx[i] <= half) break;
      idx[i] = -half;
    }
  }
  return net;
}

std::optional<Element> VectorSpace::closest_in_ball(const Element& y, const Element& center,
                                                    double radius) const {
  const double r = distance(center, y);
  if (r <= radius) return y;
  if (dim_ == 1) {
    return Element::scalar(y[0] > center[0] ? center[0] + radius : center[0] - radius);
  }
  // Radial projection attains distance r - radius, which is optimal for any norm.
  double scale = radius / r;
  std::vector<double> coords(dim_);
  for (int attempt = 0; attempt < 64; ++attempt) {
    for (std::size_t i = 0; i < dim_; ++i) coords[i] = center[i] + (y[i] - center[i]) * scale;
    Element p{coords};
    if (distance(center, p) <= radius) return p;
    scale = std::nextafter(scale, 0.0);
  }
  return center;
}

std::string VectorSpace::format(const Element& e) const {
  std::string out;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (i) out += ';';
    out += detail::format_double(e[i]);
  }
  return out;
}

Element VectorSpace::parse(std::string_view text) const {
  std::vector<double> coords;
  for (auto field : detail::split(text, ';')) {
    auto v = detail::parse_double(detail::trim(field));
    if (!v) throw InvalidElement("cannot parse '" + std::string(text) + "' in " + describe(*this));
    coords.push_back(*v);
  }
  Element e{std::move(coords)};
  if (!contains(e)) {
    throw InvalidElement("'" + std::string(text) + "' is not an element of " + describe(*this));
  }
  return e;
}

// ---------------------------------------------------------------------------
// FiniteSpace

FiniteSpace::FiniteSpace(std::string id, std::vector<std::string> names,
                         std::vector<std::vector<double>> loss, bool metric)
    : MetricSpace(std::move(id)), names_(std::move(names)), metric_(metric) {
  const std::size_t n = names_.size();
  if (n == 0) throw PreconditionError("finite space needs at least one element");
  if (loss.size() != n) throw PreconditionError("loss matrix must be square");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (names_[i] == names_[j]) throw PreconditionError("duplicate element name '" + names_[i] + "'");
    }
  }
  loss_.reserve(n * n);
  for (const auto& row : loss) {
    if (row.size() != n) throw PreconditionError("loss matrix must be square");
    loss_.insert(loss_.end(), row.begin(), row.end());
  }
  for (double v : loss_) diameter_ = std::max(diameter_, v);
}

double FiniteSpace::distance(const Element& a, const Element& b) const {
  return loss_[a.symbol_index() * names_.size() + b.symbol_index()];
}

bool FiniteSpace::less(const Element& a, const Element& b) const { return a[0] < b[0]; }

bool FiniteSpace::contains(const Element& e) const {
  if (e.size() != 1) return false;
  const double v = e[0];
  return v >= 0.0 && v < static_cast<double>(names_.size()) && v == std::floor(v);
}

std::uint64_t FiniteSpace::rank(const Element& e) const {
  if (!contains(e)) throw InvalidElement("element not in " + describe(*this));
  return e.symbol_index() + 1;
}

std::vector<Element> FiniteSpace::first_elements(std::uint64_t count) const {
  const auto m = std::min<std::uint64_t>(count, names_.size());
  std::vector<Element> out;
  out.reserve(m);
  for (std::uint64_t i = 0; i < m; ++i) out.push_back(Element::symbol(i));
  return out;
}

std::vector<Element> FiniteSpace::eps_net(double eps) const {
  if (!(eps > 0.0)) throw PreconditionError("eps must be positive");
  return elements();
}

std::string FiniteSpace::format(const Element& e) const {
  if (!contains(e)) throw InvalidElement("element not in " + describe(*this));
  return names_[e.symbol_index()];
}

Element FiniteSpace::parse(std::string_view text) const {
  const auto it = std::find(names_.begin(), names_.end(), text);
  if (it == names_.end()) {
    throw InvalidElement("'" + std::string(text) + "' is not an element of " + describe(*this));
  }
  return Element::symbol(static_cast<std::size_t>(it - names_.begin()));
}

// ---------------------------------------------------------------------------
// SubsetSpace

SubsetSpace::SubsetSpace(SpaceHandle parent, std::vector<Element> elements, Element anchor)
    : MetricSpace(parent->id() + "#subset"),
      parent_(std::move(parent)),
      elements_(std::move(elements)),
      anchor_(std::move(anchor)) {
  if (elements_.empty()) throw PreconditionError("subset space needs at least one element");
  const auto& p = *parent_;
  std::sort(elements_.begin(), elements_.end(),
            [&p](const Element& a, const Element& b) { return p.less(a, b); });
  elements_.erase(std::unique(elements_.begin(), elements_.end()), elements_.end());
  if (!contains(anchor_)) throw PreconditionError("subset anchor must be one of its elements");
  if (elements_.size() <= 4096) {
    for (std::size_t i = 0; i < elements_.size(); ++i) {
      for (std::size_t j = i + 1; j < elements_.size(); ++j) {
        diameter_ = std::max(diameter_, p.distance(elements_[i], elements_[j]));
      }
    }
  } else {
    diameter_ = p.diameter();
  }
}

double SubsetSpace::distance(const Element& a, const Element& b) const {
  return parent_->distance(a, b);
}

bool SubsetSpace::less(const Element& a, const Element& b) const { return parent_->less(a, b); }

bool SubsetSpace::contains(const Element& e) const {
  if (!parent_->contains(e)) return false;
  const auto& p = *parent_;
  const auto it = std::lower_bound(elements_.begin(), elements_.end(), e,
                                   [&p](const Element& a, const Element& b) { return p.less(a, b); });
  return it != elements_.end() && *it == e;
}

std::uint64_t SubsetSpace::rank(const Element& e) const {
  const auto& p = *parent_;
  const auto it = std::lower_bound(elements_.begin(), elements_.end(), e,
                                   [&p](const Element& a, const Element& b) { return p.less(a, b); });
  if (it == elements_.end() || !(*it == e)) throw InvalidElement("element not in " + describe(*this));
  return static_cast<std::uint64_t>(it - elements_.begin()) + 1;
}

std::vector<Element> SubsetSpace::first_elements(std::uint64_t count) const {
  const auto m = std::min<std::uint64_t>(count, elements_.size());
  return {elements_.begin(), elements_.begin() + static_cast<std::ptrdiff_t>(m)};
}

std::vector<Element> SubsetSpace::eps_net(double eps) const {
  if (!(eps > 0.0)) throw PreconditionError("eps must be positive");
  return elements_;
}

Element SubsetSpace::parse(std::string_view text) const {
  Element e = parent_->parse(text);
  if (!contains(e)) {
    throw InvalidElement("'" + std::string(text) + "' is not an element of " + describe(*this));
  }
  return e;
}

// ---------------------------------------------------------------------------
// Built-ins and registry

SpaceHandle real_line(double box_half_width) {
  return std::make_shared<VectorSpace>(1, Norm::l2, box_half_width);
}

SpaceHandle euclidean(std::size_t dim, Norm norm, double box_half_width) {
  return std::make_shared<VectorSpace>(dim, norm, box_half_width);
}

std::shared_ptr<const FiniteSpace> four_point() {
  // Order and omega: a, b, c, o.
  return std::make_shared<FiniteSpace>(
      "fourpoint", std::vector<std::string>{"a", "b", "c", "o"},
      std::vector<std::vector<double>>{
          {0.0, 1.0, 1.0, 0.5},
          {1.0, 0.0, 1.0, 0.5},
          {1.0, 1.0, 0.0, 0.5},
          {0.5, 0.5, 0.5, 0.0},
      });
}

std::shared_ptr<const FiniteSpace> singleton() {
  return std::make_shared<FiniteSpace>("singleton", std::vector<std::string>{"x"},
                                       std::vector<std::vector<double>>{{0.0}});
}

std::shared_ptr<const FiniteSpace> discrete(std::vector<std::string> names) {
  std::string id = "discrete:";
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) id += ',';
    id += names[i];
  }
  const std::size_t n = names.size();
  std::vector<std::vector<double>> loss(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i) loss[i][i] = 0.0;
  return std::make_shared<FiniteSpace>(std::move(id), std::move(names), std::move(loss));
}

std::shared_ptr<const FiniteSpace> load_loss_matrix(const std::filesystem::path& path,
                                                    bool metric) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open loss matrix '" + path.string() + "'");
  std::string line;
  std::vector<std::string> header;
  std::vector<std::string> row_names;
  std::vector<std::vector<double>> loss;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split(line, ',');
    if (header.empty()) {
      if (fields.size() < 2) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": header needs element names");
      }
      for (std::size_t i = 1; i < fields.size(); ++i) header.emplace_back(detail::trim(fields[i]));
      continue;
    }
    if (fields.size() != header.size() + 1) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size() + 1) + " fields");
    }
    const std::string name{detail::trim(fields[0])};
    if (row_names.size() >= header.size() || name != header[row_names.size()]) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": row '" + name +
                        "' does not match the header order");
    }
    row_names.push_back(name);
    std::vector<double> row;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto v = detail::parse_double(detail::trim(fields[i]));
      if (!v) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bad number '" +
                          std::string(fields[i]) + "'");
      }
      row.push_back(*v);
    }
    loss.push_back(std::move(row));
  }
  if (header.empty() || row_names.size() != header.size()) {
    throw FormatError(path.string() + ": loss matrix is not square");
  }
  try {
    return std::make_shared<FiniteSpace>("csv:" + path.string(), std::move(header),
                                         std::move(loss), metric);
  } catch (const PreconditionError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

SpaceHandle make_space(std::string_view id, double box_half_width) {
  if (id == "real") return real_line(box_half_width);
  if (id == "fourpoint") return four_point();
  if (id == "singleton") return singleton();
  if (id.starts_with("discrete:")) {
    std::vector<std::string> names;
    for (auto f : detail::split(id.substr(9), ',')) names.emplace_back(detail::trim(f));
    return discrete(std::move(names));
  }
  if (id.starts_with("csv:")) return load_loss_matrix(std::string(id.substr(4)));
  if (id.starts_with("l1-") || id.starts_with("l2-")) {
    std::size_t dim = 0;
    const auto rest = id.substr(3);
    const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), dim);
    if (ec == std::errc{} && ptr == rest.data() + rest.size() && dim > 0) {
      return euclidean(dim, id[1] == '1' ? Norm::l1 : Norm::l2, box_half_width);
    }
  }
  throw PreconditionError("unknown space id '" + std::string(id) +
                          "' (valid: real, l1-<d>, l2-<d>, fourpoint, singleton, "
                          "discrete:<names>, csv:<path>)");
}

// ---------------------------------------------------------------------------
// Operations

double evaluate_loss(const MetricSpace& space, const Element& y, const Element& y2) {
  if (!space.contains(y) || !space.contains(y2)) {
    throw InvalidElement("element not representable in " + describe(space));
  }
  return space.distance(y, y2);
}

bool AxiomReport::has(AxiomKind kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [kind](const AxiomViolation& v) { return v.kind == kind; });
}

const char* to_string(AxiomKind kind) {
  switch (kind) {
    case AxiomKind::nonnegativity: return "nonnegativity";
    case AxiomKind::identity: return "identity";
    case AxiomKind::symmetry: return "symmetry";
    case AxiomKind::triangle: return "triangle";
    case AxiomKind::order: return "order";
  }
  return "unknown";
}

AxiomReport validate_metric_axioms(const MetricSpace& space, std::span<const Element> probes) {
  if (probes.empty()) throw PreconditionError("probe set must be nonempty");
  AxiomReport report;
  const std::size_t m = probes.size();
  std::vector<double> d(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) d[i * m + j] = space.distance(probes[i], probes[j]);
  }
  auto add = [&report](AxiomKind kind, std::vector<std::size_t> idx, std::string msg) {
    report.violations.push_back({kind, std::move(idx), std::move(msg)});
  };
  for (std::size_t i = 0; i < m; ++i) {
    if (d[i * m + i] != 0.0) {
      add(AxiomKind::identity, {i}, "d(x,x) = " + detail::format_double(d[i * m + i]));
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double v = d[i * m + j];
      if (!(v >= 0.0)) add(AxiomKind::nonnegativity, {i, j}, "d = " + detail::format_double(v));
      if (j > i && d[j * m + i] != v) {
        add(AxiomKind::symmetry, {i, j}, "d(x,y) != d(y,x)");
      }
      const bool equal = probes[i] == probes[j];
      const bool lt = space.less(probes[i], probes[j]);
      const bool gt = space.less(probes[j], probes[i]);
      if (j >= i && (equal ? (lt || gt) : (lt == gt))) {
        add(AxiomKind::order, {i, j}, "order is not a strict total order on this pair");
      }
    }
  }
  if (space.is_metric()) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < m; ++k) {
          const double lhs = d[i * m + k];
          const double rhs = d[i * m + j] + d[j * m + k];
          // Relative slack absorbs rounding in sqrt-based norms.
          if (lhs > rhs + 1e-12 * std::max(1.0, rhs)) {
            add(AxiomKind::triangle, {i, j, k}, "d(x,z) > d(x,y) + d(y,z)");
          }
        }
      }
    }
  }
  return report;
}

std::vector<Element> enumerate_labels(const MetricSpace& space, std::uint64_t bits) {
  if (!space.has_enumeration()) {
    throw UnsupportedOperation(describe(space) + " has no enumeration; cannot form Y<b>");
  }
  std::uint64_t count = bits >= 63 ? std::numeric_limits<std::uint64_t>::max()
                                   : (std::uint64_t{1} << bits);
  if (const auto card = space.cardinality()) count = std::min(count, *card);
  if (count > kMaxMaterialized) {
    throw PreconditionError("Y<" + std::to_string(bits) + "> of " + describe(space) +
                            " is too large to materialize");
  }
  return space.first_elements(count);
}

Element project_to_eps_net(const MetricSpace& space, const Element& y,
                           std::span<const Element> net) {
  if (net.empty()) throw PreconditionError("project_to_eps_net: net must be nonempty");
  std::size_t best = 0;
  double best_d = space.distance(y, net[0]);
  for (std::size_t i = 1; i < net.size(); ++i) {
    const double dist = space.distance(y, net[i]);
    if (dist < best_d || (dist == best_d && space.less(net[i], net[best]))) {
      best = i;
      best_d = dist;
    }
  }
  return net[best];
}

std::vector<Element> ball_elements(const MetricSpace& space, const Element& center,
                                   double radius) {
  const auto card = space.has_enumeration() ? space.cardinality() : std::nullopt;
  if (!card) {
    throw UnsupportedOperation(describe(space) + " is not a finite enumerable space");
  }
  std::vector<Element> out;
  for (auto& e : space.first_elements(*card)) {
    if (space.distance(center, e) <= radius) out.push_back(std::move(e));
  }
  return out;
}

Element diameter_truncate(const MetricSpace& space, const Element& y, double radius) {
  if (!(radius > 0.0)) throw PreconditionError("diameter_truncate: L must be positive");
  const auto anchor = space.anchor();
  if (!anchor) throw UnsupportedOperation(describe(space) + " has no anchor");
  if (!space.contains(y)) throw InvalidElement("element not representable in " + describe(space));
  if (space.distance(*anchor, y) <= radius) return y;
  if (auto p = space.closest_in_ball(y, *anchor, radius)) return *p;
  const auto ball = ball_elements(space, *anchor, radius);
  return project_to_eps_net(space, y, ball);
}

std::size_t order_first(const MetricSpace& space, std::span<const Element> elements) {
  if (elements.empty()) throw PreconditionError("order_first: empty list");
  std::size_t best = 0;
  for (std::size_t i = 1; i < elements.size(); ++i) {
    if (space.less(elements[i], elements[best])) best = i;
  }
  return best;
}

}  // namespace medoidnet
