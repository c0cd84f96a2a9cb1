#include "mkvldp/coefficients.hpp"

#include "mkvldp/errors.hpp"

namespace mkvldp {

void CoefficientSet::validate() const {
  if (dims.d == 0 || dims.d1 == 0) {
    throw DomainError("coefficient set '" + id + "': d and d1 must be positive");
  }
  if (dims.d2 == 0 && sigma2) {
    throw DomainError("coefficient set '" + id + "': sigma2 given but d2 = 0");
  }
  if (!f1) throw DomainError("coefficient set '" + id + "': slow drift f1 is required");
  if (!b) throw DomainError("coefficient set '" + id + "': fast drift b is required");
  if (!(lipschitz_c > 0.0)) throw DomainError("coefficient set '" + id + "': declared C must be positive");
  if (!(dissipativity_alpha > 0.0)) {
    throw DomainError("coefficient set '" + id + "': declared alpha must be positive");
  }
}

}  // namespace mkvldp
