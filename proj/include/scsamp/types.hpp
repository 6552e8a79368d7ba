#pragma once

#include <complex>

namespace scsamp {

using cplx = std::complex<double>;

}  // namespace scsamp
