#include "emwf/multi_index.hpp"

#include <numeric>

#include "emwf/error.hpp"

namespace emwf {
namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

void enumerate(std::size_t axis, int remaining, MultiIndex& current, std::vector<MultiIndex>& out) {
  if (axis + 1 == current.size()) {
    current[axis] = remaining;
    out.push_back(current);
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    current[axis] = k;
    enumerate(axis + 1, remaining - k, current, out);
  }
  current[axis] = 0;
}

}  // namespace

int order(const MultiIndex& alpha) { return std::accumulate(alpha.begin(), alpha.end(), 0); }

double factorial(const MultiIndex& alpha) {
  double f = 1.0;
  for (int a : alpha) f *= factorial(a);
  return f;
}

double binomial(const MultiIndex& alpha, const MultiIndex& beta) {
  double b = 1.0;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    b *= factorial(alpha[i]) / (factorial(beta[i]) * factorial(alpha[i] - beta[i]));
  return b;
}

MultiIndex unit_index(std::size_t dims, std::size_t axis) {
  MultiIndex e(dims, 0);
  e.at(axis) = 1;
  return e;
}

MultiIndex add(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

MultiIndex subtract(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

bool less_equal(const MultiIndex& a, const MultiIndex& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i]) return false;
  return true;
}

std::vector<MultiIndex> indices_of_order(std::size_t dims, int n) {
  if (dims == 0) throw InvalidArgument("multi-index needs at least one axis");
  std::vector<MultiIndex> out;
  MultiIndex current(dims, 0);
  enumerate(0, n, current, out);
  return out;
}

std::vector<MultiIndex> indices_up_to(std::size_t dims, int max_order) {
  std::vector<MultiIndex> out;
  for (int n = 0; n <= max_order; ++n) {
    auto level = indices_of_order(dims, n);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

std::vector<MultiIndex> sub_indices(const MultiIndex& alpha) {
  std::vector<MultiIndex> out{MultiIndex(alpha.size(), 0)};
  for (std::size_t axis = 0; axis < alpha.size(); ++axis) {
    const std::size_t existing = out.size();
    for (std::size_t i = 0; i < existing; ++i) {
      for (int k = 1; k <= alpha[axis]; ++k) {
        MultiIndex b = out[i];
        b[axis] = k;
        out.push_back(std::move(b));
      }
    }
  }
  return out;
}

MultiIndex from_tuple(std::size_t dims, const std::vector<std::size_t>& tuple) {
  MultiIndex alpha(dims, 0);
  for (std::size_t r : tuple) {
    if (r >= dims) throw InvalidArgument("index tuple entry out of range");
    ++alpha[r];
  }
  return alpha;
}

std::string to_string(const MultiIndex& alpha) {
  std::string s;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(alpha[i]);
  }
  return s;
}

}  // namespace emwf
