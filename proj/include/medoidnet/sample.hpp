#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "medoidnet/element.hpp"
#include "medoidnet/errors.hpp"

namespace medoidnet {

/// Ordered sequence of (instance, label) pairs, stored column-wise.
class LabeledSample {
 public:
  LabeledSample() = default;
  LabeledSample(std::vector<Element> instances, std::vector<Element> labels)
      : instances_(std::move(instances)), labels_(std::move(labels)) {
    if (instances_.size() != labels_.size()) {
      throw PreconditionError("sample needs one label per instance");
    }
  }

  void push_back(Element x, Element y) {
    instances_.push_back(std::move(x));
    labels_.push_back(std::move(y));
  }

  std::size_t size() const { return instances_.size(); }
  bool empty() const { return instances_.empty(); }
  std::span<const Element> instances() const { return instances_; }
  std::span<const Element> labels() const { return labels_; }
  const Element& instance(std::size_t i) const { return instances_[i]; }
  const Element& label(std::size_t i) const { return labels_[i]; }

  /// Same instances with replaced labels.
  LabeledSample with_labels(std::vector<Element> labels) const {
    return LabeledSample(instances_, std::move(labels));
  }

 private:
  std::vector<Element> instances_;
  std::vector<Element> labels_;
};

}  // namespace medoidnet
