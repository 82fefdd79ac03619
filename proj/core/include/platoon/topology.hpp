#pragma once

// k-nearest-neighbor platoon graphs P(n, k), reference-vehicle placements and
// the grounded Laplacian split. Vehicle indices are 1-based everywhere in the
// public interface.

#include <span>
#include <utility>
#include <vector>

#include "platoon/matrix.hpp"

namespace platoon {

using VehicleIndex = int;
using Edge = std::pair<VehicleIndex, VehicleIndex>;  // first < second

/// Undirected platoon graph: vehicles i and j communicate iff 0 < |i - j| <= k.
class PlatoonTopology {
 public:
  int n() const noexcept { return n_; }
  int k() const noexcept { return k_; }

  bool adjacent(VehicleIndex i, VehicleIndex j) const noexcept;
  /// min(i - 1, k) + min(n - i, k)
  int degree(VehicleIndex i) const;
  std::vector<int> degrees() const;
  /// Sorted lexicographically.
  std::vector<Edge> edges() const;
  IntMatrix laplacian() const;

  friend bool operator==(const PlatoonTopology&, const PlatoonTopology&) = default;

 private:
  friend PlatoonTopology build_platoon(int n, int k);
  PlatoonTopology(int n, int k) : n_(n), k_(k) {}

  int n_;
  int k_;
};

/// Requires n >= 2 and k >= 1; k >= n - 1 yields the complete graph.
PlatoonTopology build_platoon(int n, int k);

/// Reference (grounded) vehicles and the complementary follower set.
class ReferenceSet {
 public:
  /// Validates 1 <= refs[i] <= n, non-empty, no duplicates. Order is not significant.
  static ReferenceSet from_indices(int n, std::vector<VehicleIndex> refs);

  int vehicle_count() const noexcept { return n_; }
  std::span<const VehicleIndex> refs() const noexcept { return refs_; }
  std::span<const VehicleIndex> followers() const noexcept { return followers_; }
  bool is_reference(VehicleIndex v) const noexcept;

  ReferenceSet with_added(VehicleIndex v) const;
  ReferenceSet with_removed(VehicleIndex v) const;

  friend bool operator==(const ReferenceSet&, const ReferenceSet&) = default;

 private:
  ReferenceSet() = default;

  int n_ = 0;
  std::vector<VehicleIndex> refs_;
  std::vector<VehicleIndex> followers_;
};

/// Minimally dense placement: {1..n} is cut into consecutive segments of
/// length 2k+1 from vehicle 1 (the last one may be shorter) and one reference
/// sits at position start + ceil(len/2) - 1 of each segment.
ReferenceSet md_arrangement(int n, int k);

/// One reference at `position`.
ReferenceSet single_reference(int n, VehicleIndex position);

/// Follower/reference partition of the Laplacian,
///   L = [ Lg  L12 ; L21  Lrr ]  (rows/cols ordered followers first),
/// plus the neighbor statistics the spectral bounds are stated in.
class GroundedSystem {
 public:
  const IntMatrix& lg() const noexcept { return lg_; }
  const IntMatrix& l12() const noexcept { return l12_; }
  /// betas()[i] = number of reference neighbors of followers()[i].
  std::span<const int> betas() const noexcept { return betas_; }
  /// Number of edges between the reference and follower sets.
  int boundary_size() const noexcept { return boundary_size_; }
  int dmax_followers() const noexcept { return dmax_f_; }
  int min_beta() const noexcept;
  int max_beta() const noexcept;

  std::span<const VehicleIndex> followers() const noexcept { return followers_; }
  std::span<const VehicleIndex> refs() const noexcept { return refs_; }
  std::size_t follower_count() const noexcept { return followers_.size(); }
  std::size_t reference_count() const noexcept { return refs_.size(); }

  Matrix lg_real() const { return lg_.cast<double>(); }
  Matrix l12_real() const { return l12_.cast<double>(); }

 private:
  friend GroundedSystem ground(const PlatoonTopology&, const ReferenceSet&);
  GroundedSystem() = default;

  IntMatrix lg_;
  IntMatrix l12_;
  std::vector<int> betas_;
  int boundary_size_ = 0;
  int dmax_f_ = 0;
  std::vector<VehicleIndex> followers_;
  std::vector<VehicleIndex> refs_;
};

/// Throws ParameterError when every vehicle is a reference or the sizes disagree.
GroundedSystem ground(const PlatoonTopology& topology, const ReferenceSet& refs);

}  // namespace platoon
