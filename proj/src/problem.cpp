#include "addbo/problem.hpp"

namespace addbo {

void Problem::validate() const {
  if (!objective)
    throw UsageError("Problem '" + name + "': missing objective");
  if (decomposition && decomposition->dim() != space.dim())
    throw UsageError("Problem '" + name + "': decomposition does not match the search space");
}

} // namespace addbo
