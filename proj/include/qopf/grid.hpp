#pragma once

#include <vector>

#include "qopf/case.hpp"
#include "qopf/linalg.hpp"

namespace qopf {

/// Nodal admittance Y = G + iB assembled from series branch admittances.
SparseCMatrix build_admittance(const NetworkCase& c);

struct InjectionMatrices {
  SparseCMatrix p;
  SparseCMatrix q;
};

/// M_p = (Y^H e e^T + e e^T Y)/2 and M_q = (Y^H e e^T - e e^T Y)/(2i) for node n.
InjectionMatrices injection_matrices(const SparseCMatrix& y, int node);
InjectionMatrices injection_matrices(const NetworkCase& c, int node);

struct AuxiliaryMatrices {
  std::vector<SparseCMatrix> voltage;  ///< e_n e_n^T per node
  std::vector<SparseCMatrix> line;     ///< |Y_nm| (e_n - e_m)(e_n - e_m)^T per branch, case order
  SparseCMatrix reference;             ///< e_ref e_ref^T
};

AuxiliaryMatrices auxiliary_matrices(const NetworkCase& c);

}  // namespace qopf
