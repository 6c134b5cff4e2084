#include "cpdsss/tx.hpp"

#include <cmath>
#include <cstdlib>
#include <string>
#include <utility>

#include "cpdsss/errors.hpp"

namespace cpdsss {

std::vector<CodeAssignment> allocate_codes(int num_users, int k_bits, int guard, int n_len,
                                           AllocationMode mode, int user_stride) {
    if (num_users < 1) throw InvalidArgument("allocate_codes: need at least one user");
    if (k_bits < 0) throw InvalidArgument("allocate_codes: k_bits must be >= 0");
    if (guard < 1 || guard >= n_len) throw InvalidArgument("allocate_codes: guard L must be in [1, N)");

    const int spacing = guard + 1;
    const int codes = k_bits + 1;
    const long per_user = static_cast<long>(codes) * spacing;
    if (per_user > n_len)
        throw CapacityError("allocate_codes: one user needs " + std::to_string(per_user) + " samples, N = " +
                                std::to_string(n_len),
                            0);

    const int max_users = static_cast<int>(n_len / per_user);
    if (mode == AllocationMode::Orthogonal && num_users > max_users)
        throw CapacityError("allocate_codes: " + std::to_string(num_users) +
                                " users exceed orthogonal capacity; maximum supportable U = " +
                                std::to_string(max_users),
                            max_users);

    const long stride = mode == AllocationMode::Orthogonal ? per_user : (user_stride > 0 ? user_stride : n_len / num_users);
    std::vector<CodeAssignment> out;
    out.reserve(static_cast<std::size_t>(num_users));
    for (int u = 0; u < num_users; ++u) {
        CodeAssignment a;
        a.user_id = u;
        a.k_bits = k_bits;
        a.guard = guard;
        for (int k = 0; k < codes; ++k)
            a.shift_indices.push_back(static_cast<int>((u * stride + static_cast<long>(k) * spacing) % n_len));
        out.push_back(std::move(a));
    }
    return out;
}

int cyclic_distance(int a, int b, int n_len) {
    int d = std::abs(a - b) % n_len;
    return std::min(d, n_len - d);
}

double code_amplitude(double total_power, int k_bits) {
    if (total_power < 0.0) throw InvalidArgument("code_amplitude: total power must be nonnegative");
    return std::sqrt(total_power / (k_bits + 1));
}

CVec build_message(const ZcBasis& basis, const CodeAssignment& assign, std::span<const int> bits,
                   double amplitude) {
    if (bits.size() != assign.shift_indices.size())
        throw InvalidArgument("build_message: expected " + std::to_string(assign.shift_indices.size()) +
                              " bits, got " + std::to_string(bits.size()));
    if (bits.empty() || bits[0] != 1) throw InvalidArgument("build_message: reference bit must be +1");
    for (int b : bits)
        if (b != 1 && b != -1) throw InvalidArgument("build_message: bits must be +1 or -1");

    const int n = basis.n_len();
    CVec body(static_cast<std::size_t>(n), cdouble{0.0, 0.0});
    for (std::size_t k = 0; k < bits.size(); ++k) {
        const double g = amplitude * bits[k];
        const int shift = assign.shift_indices[k];
        for (int m = 0; m < n; ++m) body[static_cast<std::size_t>(m)] += g * basis.at(shift, m);
    }
    return body;
}

CVec add_cp(std::span<const cdouble> body, int cp_len) {
    const auto n = static_cast<int>(body.size());
    if (cp_len < 0 || cp_len >= n) throw InvalidArgument("add_cp: cp_len must be in [0, N)");
    CVec out;
    out.reserve(body.size() + static_cast<std::size_t>(cp_len));
    out.insert(out.end(), body.end() - cp_len, body.end());
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

CVec remove_cp(std::span<const cdouble> samples, int cp_len) {
    const auto total = static_cast<int>(samples.size());
    // samples hold N + cp_len values; the body length N must exceed cp_len
    if (cp_len < 0 || cp_len >= total - cp_len)
        throw InvalidArgument("remove_cp: cp_len must be in [0, N)");
    return CVec(samples.begin() + cp_len, samples.end());
}

TxFrame make_frame(CVec body, int cp_len) {
    TxFrame f;
    f.samples = add_cp(body, cp_len);
    f.body = std::move(body);
    f.cp_len = cp_len;
    return f;
}

}  // namespace cpdsss
