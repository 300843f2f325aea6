#pragma once

namespace dage {

// All three throw DomainError for x <= 0.
double digamma(double x);
double trigamma(double x);
double lgamma_lanczos(double x);

}  // namespace dage
