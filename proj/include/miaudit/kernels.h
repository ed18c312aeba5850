// Copyright 2026 The mia-audit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense double-precision kernels used by the attack statistics, the sparse
// cosine norms and the Bag-of-Words classifier.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The variant is picked once at first use from CPUID; the
// environment variable MIAUDIT_KERNELS=scalar forces the reference path.
// Results of the two backends agree to within a few ulps per element but are
// not bit-identical (the vector path reassociates sums). Within one process
// the backend is fixed, so every call is deterministic.

#ifndef MIAUDIT_KERNELS_H_
#define MIAUDIT_KERNELS_H_

#include <span>
#include <string_view>

namespace miaudit::kernels {

enum class Backend { kScalar, kAvx2 };

std::string_view BackendName(Backend backend);

// The backend used by the free functions below.
Backend ActiveBackend();

// True when the CPU and the build both support `backend`.
bool BackendAvailable(Backend backend);

// Overrides the dispatch. Intended for tests and benchmarks; returns the
// previous backend. Throws if the backend is unavailable.
Backend SetBackend(Backend backend);

double Sum(std::span<const double> x);
double Dot(std::span<const double> x, std::span<const double> y);
// y += a * x
void Axpy(double a, std::span<const double> x, std::span<double> y);
// out[i] = (x[i] - mu[i]) / sigma[i]
void Standardize(std::span<const double> x, std::span<const double> mu,
                 std::span<const double> sigma, std::span<double> out);

// Per-backend entry points, used by the equivalence tests.
namespace scalar {
double Sum(std::span<const double> x);
double Dot(std::span<const double> x, std::span<const double> y);
void Axpy(double a, std::span<const double> x, std::span<double> y);
void Standardize(std::span<const double> x, std::span<const double> mu,
                 std::span<const double> sigma, std::span<double> out);
}  // namespace scalar

namespace avx2 {
double Sum(std::span<const double> x);
double Dot(std::span<const double> x, std::span<const double> y);
void Axpy(double a, std::span<const double> x, std::span<double> y);
void Standardize(std::span<const double> x, std::span<const double> mu,
                 std::span<const double> sigma, std::span<double> out);
}  // namespace avx2

}  // namespace miaudit::kernels

#endif  // MIAUDIT_KERNELS_H_
