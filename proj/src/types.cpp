#include "addbo/types.hpp"

#include <algorithm>
#include <sstream>

namespace addbo {

SearchSpace::SearchSpace(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() < 1)
    throw UsageError("SearchSpace: dimension must be >= 1");
  if (lower_.size() != upper_.size())
    throw UsageError("SearchSpace: lower/upper size mismatch");
  for (Index i = 0; i < lower_.size(); ++i)
    if (!(lower_[i] < upper_[i]))
      throw UsageError("SearchSpace: lower[" + std::to_string(i) +
                       "] must be < upper");
}

bool SearchSpace::contains(const Eigen::Ref<const Vector> &x) const {
  if (x.size() != dim())
    return false;
  return (x.array() >= lower_.array()).all() &&
         (x.array() <= upper_.array()).all();
}

Vector SearchSpace::clamp(const Eigen::Ref<const Vector> &x) const {
  return x.cwiseMax(lower_).cwiseMin(upper_);
}

Vector SearchSpace::to_unit(const Eigen::Ref<const Vector> &x) const {
  return ((x - lower_).array() / (upper_ - lower_).array()).matrix();
}

Vector SearchSpace::from_unit(const Eigen::Ref<const Vector> &u) const {
  return lower_ + (u.array() * (upper_ - lower_).array()).matrix();
}

SearchSpace SearchSpace::restrict(const std::vector<Index> &indices) const {
  return {lower_(indices), upper_(indices)};
}

Decomposition::Decomposition(std::vector<std::vector<Index>> groups, Index dim)
    : groups_(std::move(groups)), dim_(dim) {
  if (dim_ < 1)
    throw UsageError("Decomposition: dimension must be >= 1");
  if (groups_.empty())
    throw UsageError("Decomposition: at least one group required");
  std::vector<int> seen(static_cast<std::size_t>(dim_), 0);
  for (const auto &g : groups_) {
    if (g.empty())
      throw UsageError("Decomposition: empty group");
    for (Index i : g) {
      if (i < 0 || i >= dim_)
        throw UsageError("Decomposition: index " + std::to_string(i) +
                         " out of range");
      if (seen[static_cast<std::size_t>(i)]++)
        throw UsageError("Decomposition: index " + std::to_string(i) +
                         " appears in more than one group");
    }
    effective_dim_ = std::max<Index>(effective_dim_, static_cast<Index>(g.size()));
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw UsageError("Decomposition: groups do not cover every coordinate");
}

Decomposition Decomposition::single(Index d) {
  std::vector<Index> all(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i)
    all[static_cast<std::size_t>(i)] = i;
  return {{all}, d};
}

Decomposition Decomposition::singletons(Index d) { return blocks(d, 1); }

Decomposition Decomposition::blocks(Index d, Index block) {
  if (block < 1 || d % block != 0)
    throw UsageError("Decomposition::blocks: d must be a multiple of block");
  std::vector<std::vector<Index>> groups;
  for (Index start = 0; start < d; start += block) {
    std::vector<Index> g;
    for (Index i = start; i < start + block; ++i)
      g.push_back(i);
    groups.push_back(std::move(g));
  }
  return {std::move(groups), d};
}

Vector Decomposition::slice(const Eigen::Ref<const Vector> &x, Index j) const {
  return x(groups_[static_cast<std::size_t>(j)]);
}

std::string describe(const Decomposition &decomp) {
  std::ostringstream os;
  os << decomp.num_groups() << " groups, d=" << decomp.dim()
     << ", effective dim=" << decomp.effective_dim();
  return os.str();
}

} // namespace addbo
