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
#include <atomic>
#include <cstdlib>
#include <span>
#include <string>
#include <string_view>

#include "miaudit/error.h"
#include "miaudit/kernels.h"

namespace miaudit::kernels {

namespace {

bool CpuHasAvx2() {
#if defined(MIAUDIT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend Detect() {
  if (const char* forced = std::getenv("MIAUDIT_KERNELS")) {
    if (std::string_view(forced) == "scalar") return Backend::kScalar;
  }
  return CpuHasAvx2() ? Backend::kAvx2 : Backend::kScalar;
}

std::atomic<Backend>& Active() {
  static std::atomic<Backend> backend{Detect()};
  return backend;
}

}  // namespace

std::string_view BackendName(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
  }
  return "unknown";
}

Backend ActiveBackend() { return Active().load(std::memory_order_relaxed); }

bool BackendAvailable(Backend backend) {
  return backend == Backend::kScalar || CpuHasAvx2();
}

Backend SetBackend(Backend backend) {
  if (!BackendAvailable(backend)) {
    throw Error(ErrorCode::kInvalidArgument,
                "kernel backend unavailable: " + std::string(BackendName(backend)));
  }
  return Active().exchange(backend);
}

double Sum(std::span<const double> x) {
  return ActiveBackend() == Backend::kAvx2 ? avx2::Sum(x) : scalar::Sum(x);
}

double Dot(std::span<const double> x, std::span<const double> y) {
  return ActiveBackend() == Backend::kAvx2 ? avx2::Dot(x, y)
                                           : scalar::Dot(x, y);
}

void Axpy(double a, std::span<const double> x, std::span<double> y) {
  if (ActiveBackend() == Backend::kAvx2) {
    avx2::Axpy(a, x, y);
  } else {
    scalar::Axpy(a, x, y);
  }
}

void Standardize(std::span<const double> x, std::span<const double> mu,
                 std::span<const double> sigma, std::span<double> out) {
  if (ActiveBackend() == Backend::kAvx2) {
    avx2::Standardize(x, mu, sigma, out);
  } else {
    scalar::Standardize(x, mu, sigma, out);
  }
}

#if !defined(MIAUDIT_HAVE_AVX2)
// Non-x86 builds: the avx2 entry points exist so tests link, but are never
// selected because BackendAvailable(kAvx2) is false.
namespace avx2 {
double Sum(std::span<const double> x) { return scalar::Sum(x); }
double Dot(std::span<const double> x, std::span<const double> y) {
  return scalar::Dot(x, y);
}
void Axpy(double a, std::span<const double> x, std::span<double> y) {
  scalar::Axpy(a, x, y);
}
void Standardize(std::span<const double> x, std::span<const double> mu,
                 std::span<const double> sigma, std::span<double> out) {
  scalar::Standardize(x, mu, sigma, out);
}
}  // namespace avx2
#endif

}  // namespace miaudit::kernels
