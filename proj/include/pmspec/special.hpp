// special.hpp - small special functions used by the closed-form spectra

#pragma once

#include <array>

namespace pmspec {

/// sin(x)/x with sinc(0) = 1.
double sinc(double x);

/// sinc and its first three derivatives at x.
std::array<double, 4> sinc_derivatives(double x);

/// Dawson integral F(x) = exp(-x^2) int_0^x exp(t^2) dt.
double dawson(double x);

}  // namespace pmspec
