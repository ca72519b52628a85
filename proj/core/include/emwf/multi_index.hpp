#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace emwf {

// Exponent vector alpha = (alpha_0, ..., alpha_{D-1}) over configuration-space
// axes. An index tuple (r_1 <= ... <= r_n) and its exponent vector are the same
// object; exponent vectors are the canonical storage form.
using MultiIndex = std::vector<int>;

int order(const MultiIndex& alpha);

// alpha! = prod alpha_a!
double factorial(const MultiIndex& alpha);

// prod_a C(alpha_a, beta_a), requires beta <= alpha componentwise.
double binomial(const MultiIndex& alpha, const MultiIndex& beta);

MultiIndex unit_index(std::size_t dims, std::size_t axis);
MultiIndex add(const MultiIndex& a, const MultiIndex& b);
MultiIndex subtract(const MultiIndex& a, const MultiIndex& b);
bool less_equal(const MultiIndex& a, const MultiIndex& b);

// All exponent vectors in `dims` axes with |alpha| == n, in lexicographically
// descending order of the exponent vector (x^n first).
std::vector<MultiIndex> indices_of_order(std::size_t dims, int n);

// All exponent vectors with |alpha| <= max_order, grouped by increasing order.
std::vector<MultiIndex> indices_up_to(std::size_t dims, int max_order);

// All beta with beta <= alpha componentwise.
std::vector<MultiIndex> sub_indices(const MultiIndex& alpha);

// Converts an index tuple (r_1, ..., r_n) to its exponent vector.
MultiIndex from_tuple(std::size_t dims, const std::vector<std::size_t>& tuple);

// "2;0;1" style rendering used in CSV exports.
std::string to_string(const MultiIndex& alpha);

}  // namespace emwf
