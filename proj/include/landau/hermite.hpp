#pragma once
#include <vector>

namespace landau {

enum class HermiteForm { polynomial, function };

// Physicists' Hermite H_n by the three-term recurrence, or h_n = H_n e^{-x^2/2}.
double hermite(int n, double x, HermiteForm form = HermiteForm::polynomial);

// H_0(x) .. H_nmax(x) into out[0..nmax].
void hermite_all(int nmax, double x, double* out);

// ||h_n||^2 = sqrt(pi) 2^n n!
double hermite_function_norm_sq(int n);

// Supported level range of the basis (scaled recurrences would be needed beyond).
constexpr int kMaxLevel = 12;

// Certified tail of a Gaussian-Hermite lattice sum. For |P(u)| <= sum_j a_j (2|u|+j)^j,
// bounds sum_{m>=0} |P(u_m)| e^{-u_m^2/2} over points u_m >= U spaced by >= delta.
// Returns +inf when U is not yet in the monotone-decay regime.
double hermite_gaussian_tail(const std::vector<double>& a, double U, double delta);

// Generalized Laguerre L_n^{(alpha)}(x) by the three-term recurrence.
double laguerre(int n, double alpha, double x);

// Fourier transform of h_n^2 with e^{-i w u}: ||h_n||^2 e^{-w^2/4} L_n(w^2/2), and its w-derivative.
double hermite_square_fourier(int n, double w);
double hermite_square_fourier_deriv(int n, double w);

// Cramer-type bound: |h_n(x)| <= 1.0865 sqrt(2^n n!).
double hermite_function_sup(int n);

}  // namespace landau
