#include "platoon/topology.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "platoon/errors.hpp"

namespace platoon {

PlatoonTopology build_platoon(int n, int k) {
  if (n < 2) throw ParameterError("build_platoon: need n >= 2, got " + std::to_string(n));
  if (k < 1) throw ParameterError("build_platoon: need k >= 1, got " + std::to_string(k));
  return PlatoonTopology(n, k);
}

bool PlatoonTopology::adjacent(VehicleIndex i, VehicleIndex j) const noexcept {
  if (i < 1 || j < 1 || i > n_ || j > n_) return false;
  const int d = std::abs(i - j);
  return d > 0 && d <= k_;
}

int PlatoonTopology::degree(VehicleIndex i) const {
  if (i < 1 || i > n_) throw ParameterError("degree: vehicle " + std::to_string(i) + " out of range");
  return std::min(i - 1, k_) + std::min(n_ - i, k_);
}

std::vector<int> PlatoonTopology::degrees() const {
  std::vector<int> d(static_cast<std::size_t>(n_));
  for (int i = 1; i <= n_; ++i) d[static_cast<std::size_t>(i - 1)] = degree(i);
  return d;
}

std::vector<Edge> PlatoonTopology::edges() const {
  std::vector<Edge> out;
  for (int i = 1; i <= n_; ++i)
    for (int j = i + 1; j <= std::min(n_, i + k_); ++j) out.emplace_back(i, j);
  return out;
}

IntMatrix PlatoonTopology::laplacian() const {
  const auto n = static_cast<std::size_t>(n_);
  IntMatrix lap(n, n);
  for (const auto& [i, j] : edges()) {
    const auto a = static_cast<std::size_t>(i - 1);
    const auto b = static_cast<std::size_t>(j - 1);
    lap(a, b) = -1;
    lap(b, a) = -1;
    lap(a, a) += 1;
    lap(b, b) += 1;
  }
  return lap;
}

ReferenceSet ReferenceSet::from_indices(int n, std::vector<VehicleIndex> refs) {
  if (n < 1) throw ParameterError("ReferenceSet: need n >= 1");
  if (refs.empty()) throw ParameterError("ReferenceSet: at least one reference vehicle is required");
  std::sort(refs.begin(), refs.end());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (refs[i] < 1 || refs[i] > n) {
      throw ParameterError("ReferenceSet: vehicle index " + std::to_string(refs[i]) + " outside 1.." +
                           std::to_string(n));
    }
    if (i > 0 && refs[i] == refs[i - 1]) {
      throw ParameterError("ReferenceSet: duplicate vehicle index " + std::to_string(refs[i]));
    }
  }
  ReferenceSet rs;
  rs.n_ = n;
  rs.refs_ = std::move(refs);
  rs.followers_.reserve(static_cast<std::size_t>(n) - rs.refs_.size());
  for (int v = 1; v <= n; ++v)
    if (!std::binary_search(rs.refs_.begin(), rs.refs_.end(), v)) rs.followers_.push_back(v);
  return rs;
}

bool ReferenceSet::is_reference(VehicleIndex v) const noexcept {
  return std::binary_search(refs_.begin(), refs_.end(), v);
}

ReferenceSet ReferenceSet::with_added(VehicleIndex v) const {
  if (is_reference(v)) throw ParameterError("with_added: vehicle " + std::to_string(v) + " is already a reference");
  auto r = refs_;
  r.push_back(v);
  return from_indices(n_, std::move(r));
}

ReferenceSet ReferenceSet::with_removed(VehicleIndex v) const {
  if (!is_reference(v)) throw ParameterError("with_removed: vehicle " + std::to_string(v) + " is not a reference");
  auto r = refs_;
  r.erase(std::find(r.begin(), r.end(), v));
  return from_indices(n_, std::move(r));
}

ReferenceSet md_arrangement(int n, int k) {
  if (n < 1) throw ParameterError("md_arrangement: need n >= 1");
  if (k < 1) throw ParameterError("md_arrangement: need k >= 1");
  const int seg = 2 * k + 1;
  std::vector<VehicleIndex> refs;
  for (int start = 1; start <= n; start += seg) {
    const int len = std::min(seg, n - start + 1);
    refs.push_back(start + (len + 1) / 2 - 1);
  }
  return ReferenceSet::from_indices(n, std::move(refs));
}

ReferenceSet single_reference(int n, VehicleIndex position) {
  return ReferenceSet::from_indices(n, {position});
}

int GroundedSystem::min_beta() const noexcept {
  return betas_.empty() ? 0 : *std::min_element(betas_.begin(), betas_.end());
}

int GroundedSystem::max_beta() const noexcept {
  return betas_.empty() ? 0 : *std::max_element(betas_.begin(), betas_.end());
}

GroundedSystem ground(const PlatoonTopology& topology, const ReferenceSet& refs) {
  if (refs.vehicle_count() != topology.n()) {
    throw ParameterError("ground: reference set is for " + std::to_string(refs.vehicle_count()) +
                         " vehicles, topology has " + std::to_string(topology.n()));
  }
  if (refs.followers().empty()) {
    throw ParameterError("ground: every vehicle is a reference, no follower dynamics remain");
  }
  const IntMatrix lap = topology.laplacian();
  GroundedSystem gs;
  gs.followers_.assign(refs.followers().begin(), refs.followers().end());
  gs.refs_.assign(refs.refs().begin(), refs.refs().end());
  const std::size_t nf = gs.followers_.size();
  const std::size_t nr = gs.refs_.size();
  gs.lg_ = IntMatrix(nf, nf);
  gs.l12_ = IntMatrix(nf, nr);
  gs.betas_.assign(nf, 0);
  for (std::size_t a = 0; a < nf; ++a) {
    const auto fa = static_cast<std::size_t>(gs.followers_[a] - 1);
    for (std::size_t b = 0; b < nf; ++b) gs.lg_(a, b) = lap(fa, static_cast<std::size_t>(gs.followers_[b] - 1));
    for (std::size_t r = 0; r < nr; ++r) {
      const auto v = lap(fa, static_cast<std::size_t>(gs.refs_[r] - 1));
      gs.l12_(a, r) = v;
      if (v != 0) ++gs.betas_[a];
    }
    gs.boundary_size_ += gs.betas_[a];
    gs.dmax_f_ = std::max(gs.dmax_f_, topology.degree(gs.followers_[a]));
  }
  return gs;
}

}  // namespace platoon
