#pragma once

// CP-DSSS transmitter: spreading-code allocation, message frames, cyclic prefix.

#include <span>
#include <vector>

#include "cpdsss/types.hpp"
#include "cpdsss/zc.hpp"

namespace cpdsss {

struct CodeAssignment {
    int user_id = 0;
    std::vector<int> shift_indices;  // reference code first, then the K information codes
    int k_bits = 0;
    int guard = 0;  // channel length L the spacing protects
};

enum class AllocationMode {
    Orthogonal,  // every code of every user at least L+1 apart
    Overloaded,  // spacing enforced within a user only; users may overlap
};

// Greedy contiguous allocation. Orthogonal mode gives user u the indices
// u*(K+1)*(L+1) + k*(L+1). Overloaded mode offsets successive users by
// user_stride samples (wrapping modulo N) so their code sets
// interleave; the default stride spreads the users evenly, N / U apart.
// Throws CapacityError when orthogonal allocation does not fit.
std::vector<CodeAssignment> allocate_codes(int num_users, int k_bits, int guard, int n_len,
                                           AllocationMode mode = AllocationMode::Orthogonal,
                                           int user_stride = 0);

// Smallest cyclic distance between two shift indices.
int cyclic_distance(int a, int b, int n_len);

struct UsrMessage {
    int user_id = 0;
    std::vector<int> bits;  // +-1, bits[0] = +1 is the reference
    double amplitude = 1.0;
};

// Per-code amplitude sqrt(P / (K+1)) that keeps the total message power fixed at P.
double code_amplitude(double total_power, int k_bits);

// x_u = amplitude * sum_k bits[k] z_{shift_indices[k]}.
CVec build_message(const ZcBasis& basis, const CodeAssignment& assign, std::span<const int> bits,
                   double amplitude);

struct TxFrame {
    CVec body;
    int cp_len = 0;
    CVec samples;
};

CVec add_cp(std::span<const cdouble> body, int cp_len);
CVec remove_cp(std::span<const cdouble> samples, int cp_len);

TxFrame make_frame(CVec body, int cp_len);

}  // namespace cpdsss
