#pragma once

// Zadoff-Chu root sequence and the algebra of its cyclic shifts.
//
// The N cyclic shifts z_0 ... z_{N-1} of a unit-norm ZC sequence form an
// orthonormal basis of C^N. A spreading code is named by its shift index; an
// N x L block [z_i ... z_{i+L-1}] is named by a ShiftWindow and never stored.

#include <cstddef>
#include <span>

#include "cpdsss/types.hpp"

namespace cpdsss {

class ZcBasis {
public:
    ZcBasis(int n_len, int root, CVec seq);

    int n_len() const noexcept { return n_len_; }
    int root() const noexcept { return root_; }
    const CVec& seq() const noexcept { return seq_; }

    // Element m of z_shift, i.e. seq[(m - shift) mod N]. No bounds check on shift.
    cdouble at(long shift, long m) const noexcept;

private:
    int n_len_;
    int root_;
    CVec seq_;
};

struct ShiftWindow {
    int start_index = 0;
    int width = 1;
};

// Unit-norm ZC sequence of length n_len. Throws InvalidArgument if n_len < 2 or
// gcd(root, n_len) != 1.
ZcBasis generate_zc(int n_len, int root = 1);

// z_i. Throws InvalidArgument unless 0 <= i < N.
CVec cyclic_shift(const ZcBasis& basis, int i);

// Same as cyclic_shift with the index reduced modulo N instead of range checked.
CVec cyclic_shift_unchecked(const ZcBasis& basis, long i);

// Dense L x L matrix Z_{w1}^H Z_{w2}, row-major. Verification aid only.
std::vector<cdouble> window_product(const ZcBasis& basis, ShiftWindow w1, ShiftWindow w2);

// Inner product a^H b.
cdouble inner(std::span<const cdouble> a, std::span<const cdouble> b);

}  // namespace cpdsss
