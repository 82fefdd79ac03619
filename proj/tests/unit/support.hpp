#pragma once

#include "oracles/oracles.hpp"
#include "platoon/matrix.hpp"
#include "platoon/topology.hpp"

namespace support {

inline platoon::GroundedSystem ground(const oracle::Instance& inst) {
  return platoon::ground(platoon::build_platoon(inst.n, inst.k),
                         platoon::ReferenceSet::from_indices(inst.n, inst.refs));
}

inline platoon::Matrix to_matrix(const oracle::Dense& d) {
  platoon::Matrix m(d.size(), d.empty() ? 0 : d[0].size());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = d[i][j];
  return m;
}

inline oracle::Dense to_dense(const platoon::Matrix& m) {
  oracle::Dense d(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) d[i][j] = m(i, j);
  return d;
}

inline platoon::GroundedSystem p52_ref3() {
  return platoon::ground(platoon::build_platoon(5, 2), platoon::ReferenceSet::from_indices(5, {3}));
}

inline platoon::GroundedSystem p364_md() {
  return platoon::ground(platoon::build_platoon(36, 4), platoon::md_arrangement(36, 4));
}

}  // namespace support
