#include "fpoly.hpp"

#include <stdexcept>

namespace symcap {

MonomialPoly f_polynomial(const Tableau& tau, const Tableau& gamma, int d) {
  if (!(tau.shape == gamma.shape)) throw std::invalid_argument("f_polynomial: tableau shapes differ");
  for (int e : tau.entries)
    if (e < 0 || e >= d) throw std::out_of_range("tableau entry outside [d]");
  for (int e : gamma.entries)
    if (e < 0 || e >= d) throw std::out_of_range("tableau entry outside [d]");
  MonomialPoly poly{d, tau.shape.weight(), {}};
  CellMask all;
  detail::FExpander ex(tau.shape, d, all);
  ex.expand(detail::row_rearrangements(tau), detail::row_rearrangements(gamma),
            [&](const std::vector<int>& counts, std::int64_t c) { poly.terms[counts] += c; });
  for (auto it = poly.terms.begin(); it != poly.terms.end();) {
    if (it->second == 0)
      it = poly.terms.erase(it);
    else
      ++it;
  }
  return poly;
}

}  // namespace symcap
