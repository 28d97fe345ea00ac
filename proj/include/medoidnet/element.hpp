#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace medoidnet {

/// A point of an instance or label space.
///
/// Vector spaces store coordinates; finite spaces store a single coordinate
/// holding the element's index in the space's construction order. The
/// meaning of the coordinates is owned by the space the element belongs to.
class Element {
 public:
  Element() = default;
  explicit Element(std::vector<double> coords) : coords_(std::move(coords)) {}
  Element(std::initializer_list<double> coords) : coords_(coords) {}

  static Element scalar(double v) { return Element{std::vector<double>{v}}; }
  static Element symbol(std::size_t index) {
    return Element{std::vector<double>{static_cast<double>(index)}};
  }

  std::span<const double> coords() const { return coords_; }
  std::size_t size() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }

  /// Index of a finite-space element.
  std::size_t symbol_index() const { return static_cast<std::size_t>(coords_.at(0)); }

  friend bool operator==(const Element&, const Element&) = default;

 private:
  std::vector<double> coords_;
};

}  // namespace medoidnet
