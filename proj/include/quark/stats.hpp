// Copyright 2026 The Quark Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

namespace quark {

struct SummaryStats {
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;  // population (divides by n)
  double min = 0.0;
  double max = 0.0;
};

// Throws ValidationError on empty input. Even-length median is the mean of
// the two middle values.
SummaryStats summarize(std::span<const double> values);
double median(std::span<const double> values);

struct PairedTestResult {
  std::size_t n = 0;
  double t_stat = 0.0;
  double p_value = 1.0;
  double mean_diff = 0.0;
};

// Two-sided paired Student t-test on d_i = a_i - b_i with n - 1 degrees of
// freedom. Zero variance gives t = 0, p = 1 when every difference is zero and
// p = 0 otherwise. Throws ValidationError when sizes differ or n < 2.
PairedTestResult paired_ttest(std::span<const double> a, std::span<const double> b);

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

// P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

}  // namespace quark
