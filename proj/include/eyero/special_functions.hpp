#pragma once

namespace eyero::special {

// Regularized incomplete beta I_x(a, b), evaluated with the modified Lentz
// continued fraction. a, b > 0, 0 <= x <= 1.
double incomplete_beta(double a, double b, double x);

// Student t with `df` degrees of freedom.
double student_t_cdf(double t, double df);
double student_t_two_sided_p(double t, double df);

// Upper tail P(F > f) of the F(df1, df2) distribution.
double f_upper_tail(double f, double df1, double df2);

// Q_KS(lambda) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

} // namespace eyero::special
