#pragma once

#include <cstddef>
#include <vector>

namespace frontflow {

/// Orientation of a front: +1 if the well index increases across it
/// (left to right), -1 if it decreases.
enum class Orientation : int { minus = -1, plus = 1 };

inline int sign_of(Orientation o) { return static_cast<int>(o); }

/// Front positions together with the well labels of the half-integer sites.
/// labels[k] is the (0-based) well on the interval between front k-1 and
/// front k, so labels.size() == positions.size() + 1.
struct ChainSpec {
  std::vector<double> positions;
  std::vector<int> labels;

  std::size_t size() const { return positions.size(); }
  Orientation orientation(std::size_t k) const {
    return labels.at(k + 1) > labels.at(k) ? Orientation::plus : Orientation::minus;
  }
  /// 0-based transition (i, i+1) crossed by front k.
  int transition(std::size_t k) const {
    return labels.at(k) < labels.at(k + 1) ? labels.at(k) : labels.at(k + 1);
  }
  /// Label of the well between fronts k and k+1.
  int well_between(std::size_t k) const { return labels.at(k + 1); }
  /// True if fronts k and k+1 attract (front / anti-front pair).
  bool attractive(std::size_t k) const { return orientation(k) != orientation(k + 1); }
};

/// Throws std::invalid_argument unless labels are in [0, wells), adjacent
/// labels differ by exactly one and positions are strictly increasing.
void validate_chain(const ChainSpec& chain, std::size_t wells);

}  // namespace frontflow
