#pragma once

#include "pilekit/common.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pilekit {

// One face of an axis-aligned box: the set { x : x[axis] = bound }.
struct SegmentId {
  int axis = 0;    // 0-based coordinate index
  bool high = false;

  bool operator==(const SegmentId&) const = default;

  std::string name() const {
    return "x" + std::to_string(axis + 1) + (high ? "=hi" : "=lo");
  }
  static SegmentId parse(const std::string& text);
};

// Axis-aligned box with its faces as boundary segments. The measure is
// Lebesgue on the interior and Hausdorff (face area) on each segment.
class DomainSpec {
 public:
  DomainSpec() = default;
  DomainSpec(Vector lower, Vector upper);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  double volume() const;
  // Hausdorff measure of a face (product of the other edge lengths).
  double segment_measure(const SegmentId& seg) const;
  // Outward unit normal of a face.
  Vector normal(const SegmentId& seg) const;
  // Coordinate value pinned on a face.
  double face_coordinate(const SegmentId& seg) const;

  bool contains(PointRef x, double tol = 1e-12) const;
  void validate_segment(const SegmentId& seg) const;

  bool operator==(const DomainSpec&) const = default;

 private:
  Vector lower_, upper_;
};

}  // namespace pilekit
