#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "medoidnet/element.hpp"

namespace medoidnet {

/// An instance or label space: a loss (usually a metric), a strict total
/// order used for every tie-break, and optional capabilities.
///
/// Implementations are immutable after construction and safe to share
/// between threads.
class MetricSpace {
 public:
  explicit MetricSpace(std::string id) : id_(std::move(id)) {}
  virtual ~MetricSpace() = default;

  const std::string& id() const { return id_; }

  /// Loss between two elements. Unchecked: callers validate membership.
  virtual double distance(const Element& a, const Element& b) const = 0;
  /// Strict total order ("lexicographic" order of the space).
  virtual bool less(const Element& a, const Element& b) const = 0;
  virtual bool contains(const Element& e) const = 0;
  /// sup of the loss; +inf when unbounded.
  virtual double diameter() const = 0;
  /// False for label spaces declared with a general (non-metric) loss.
  virtual bool is_metric() const { return true; }
  /// The y0 used for diameter truncation.
  virtual std::optional<Element> anchor() const { return std::nullopt; }

  // Canonical injection omega into 1, 2, 3, ...
  virtual bool has_enumeration() const { return false; }
  /// Number of elements; nullopt when infinite or uncountable.
  virtual std::optional<std::uint64_t> cardinality() const { return std::nullopt; }
  virtual std::uint64_t rank(const Element& e) const;
  /// The `count` elements of smallest rank, in rank order (fewer if the
  /// space is smaller).
  virtual std::vector<Element> first_elements(std::uint64_t count) const;

  virtual bool has_eps_net() const { return false; }
  /// A countable eps-net of the space, in the space's order.
  virtual std::vector<Element> eps_net(double eps) const;

  /// Closed-form closest point of the closed ball B[center, radius] to y,
  /// for spaces that have one. nullopt means "search the enumeration".
  virtual std::optional<Element> closest_in_ball(const Element& y, const Element& center,
                                                 double radius) const;

  /// Finite spaces print elements by name; vector spaces by coordinates.
  virtual bool symbolic() const { return false; }
  /// Coordinates per element for vector spaces, 1 for symbolic spaces.
  virtual std::size_t dimension() const { return 1; }
  virtual std::string format(const Element& e) const = 0;
  virtual Element parse(std::string_view text) const = 0;

 private:
  std::string id_;
};

using SpaceHandle = std::shared_ptr<const MetricSpace>;

enum class Norm { l1, l2 };

/// R^d with the l1 or l2 norm (d = 1 gives the real line with |x - y|).
///
/// Order is coordinatewise lexicographic, the anchor is the origin, and the
/// eps-net oracle is the grid of pitch eps/sqrt(d) (integer multiples of the
/// pitch) inside the box [-box, box]^d.
class VectorSpace final : public MetricSpace {
 public:
  static constexpr double kDefaultBox = 10.0;

  VectorSpace(std::size_t dim, Norm norm, double box_half_width = kDefaultBox);

  double distance(const Element& a, const Element& b) const override;
  bool less(const Element& a, const Element& b) const override;
  bool contains(const Element& e) const override;
  double diameter() const override;
  std::optional<Element> anchor() const override;
  bool has_eps_net() const override { return true; }
  std::vector<Element> eps_net(double eps) const override;
  std::optional<Element> closest_in_ball(const Element& y, const Element& center,
                                         double radius) const override;
  std::size_t dimension() const override { return dim_; }
  std::string format(const Element& e) const override;
  Element parse(std::string_view text) const override;

  Norm norm() const { return norm_; }
  double box_half_width() const { return box_; }

 private:
  std::size_t dim_;
  Norm norm_;
  double box_;
};

/// A finite space given by its element names and a square loss matrix.
/// Order and enumeration both follow construction order.
class FiniteSpace final : public MetricSpace {
 public:
  FiniteSpace(std::string id, std::vector<std::string> names,
              std::vector<std::vector<double>> loss, bool metric = true);

  double distance(const Element& a, const Element& b) const override;
  bool less(const Element& a, const Element& b) const override;
  bool contains(const Element& e) const override;
  double diameter() const override { return diameter_; }
  bool is_metric() const override { return metric_; }
  std::optional<Element> anchor() const override { return Element::symbol(0); }
  bool has_enumeration() const override { return true; }
  std::optional<std::uint64_t> cardinality() const override { return names_.size(); }
  std::uint64_t rank(const Element& e) const override;
  std::vector<Element> first_elements(std::uint64_t count) const override;
  bool has_eps_net() const override { return true; }
  std::vector<Element> eps_net(double eps) const override;
  bool symbolic() const override { return true; }
  std::string format(const Element& e) const override;
  Element parse(std::string_view text) const override;

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  Element element(std::string_view name) const { return parse(name); }
  std::vector<Element> elements() const { return first_elements(names_.size()); }

 private:
  std::vector<std::string> names_;
  std::vector<double> loss_;  // row-major size x size
  bool metric_;
  double diameter_ = 0.0;
};

/// A finite subset of a parent space (for instance an eps-net of R^d),
/// used as a countable label space in its own right. Elements are kept in
/// the parent's order, which is also the enumeration order.
class SubsetSpace final : public MetricSpace {
 public:
  SubsetSpace(SpaceHandle parent, std::vector<Element> elements, Element anchor);

  double distance(const Element& a, const Element& b) const override;
  bool less(const Element& a, const Element& b) const override;
  bool contains(const Element& e) const override;
  double diameter() const override { return diameter_; }
  bool is_metric() const override { return parent_->is_metric(); }
  std::optional<Element> anchor() const override { return anchor_; }
  bool has_enumeration() const override { return true; }
  std::optional<std::uint64_t> cardinality() const override { return elements_.size(); }
  std::uint64_t rank(const Element& e) const override;
  std::vector<Element> first_elements(std::uint64_t count) const override;
  bool has_eps_net() const override { return true; }
  std::vector<Element> eps_net(double eps) const override;
  bool symbolic() const override { return parent_->symbolic(); }
  std::size_t dimension() const override { return parent_->dimension(); }
  std::string format(const Element& e) const override { return parent_->format(e); }
  Element parse(std::string_view text) const override;

  const SpaceHandle& parent() const { return parent_; }
  const std::vector<Element>& elements() const { return elements_; }

 private:
  SpaceHandle parent_;
  std::vector<Element> elements_;
  Element anchor_;
  double diameter_ = 0.0;
};

// Built-in spaces.
SpaceHandle real_line(double box_half_width = VectorSpace::kDefaultBox);
SpaceHandle euclidean(std::size_t dim, Norm norm = Norm::l2,
                      double box_half_width = VectorSpace::kDefaultBox);
/// {a, b, c, o}: l(a,b) = l(b,c) = l(c,a) = 1 and l(o, .) = 1/2.
std::shared_ptr<const FiniteSpace> four_point();
std::shared_ptr<const FiniteSpace> singleton();
std::shared_ptr<const FiniteSpace> discrete(std::vector<std::string> names);
/// Square CSV loss matrix with a header row and a header column of names.
std::shared_ptr<const FiniteSpace> load_loss_matrix(const std::filesystem::path& path,
                                                    bool metric = true);

/// Resolves a space by id: "real", "l1-<d>", "l2-<d>", "fourpoint",
/// "singleton", "discrete:<name,name,...>", "csv:<path>".
SpaceHandle make_space(std::string_view id, double box_half_width = VectorSpace::kDefaultBox);

// Operations.

double evaluate_loss(const MetricSpace& space, const Element& y, const Element& y2);

enum class AxiomKind { nonnegativity, identity, symmetry, triangle, order };

struct AxiomViolation {
  AxiomKind kind;
  std::vector<std::size_t> probes;  // indices into the probe set
  std::string detail;
};

struct AxiomReport {
  std::vector<AxiomViolation> violations;
  bool ok() const { return violations.empty(); }
  bool has(AxiomKind kind) const;
};

const char* to_string(AxiomKind kind);

/// Exhaustive check over all pairs and triples of the probe set. The
/// triangle inequality is skipped for spaces declared non-metric.
AxiomReport validate_metric_axioms(const MetricSpace& space, std::span<const Element> probes);

/// Y<b>: the elements with omega(y) <= 2^b, in omega order.
std::vector<Element> enumerate_labels(const MetricSpace& space, std::uint64_t bits);

/// Closest net element to y; ties go to the order-smallest.
Element project_to_eps_net(const MetricSpace& space, const Element& y,
                           std::span<const Element> net);

/// Elements of a countable space inside the closed ball, in omega order.
std::vector<Element> ball_elements(const MetricSpace& space, const Element& center,
                                   double radius);

/// y ^ L: closest point to y in the closed L-ball about the anchor.
Element diameter_truncate(const MetricSpace& space, const Element& y, double radius);

/// Index of the order-smallest element in a nonempty list.
std::size_t order_first(const MetricSpace& space, std::span<const Element> elements);

}  // namespace medoidnet
