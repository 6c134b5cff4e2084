#pragma once

#include <complex>
#include <vector>

namespace cpdsss {

using cdouble = std::complex<double>;
using CVec = std::vector<cdouble>;

}  // namespace cpdsss
