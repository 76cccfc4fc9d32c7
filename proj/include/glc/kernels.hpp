#pragma once

#include <cstddef>

// Double-precision inner-loop kernels. Every primitive has a scalar reference
// implementation and, on x86-64, an AVX2 variant; the unqualified entry points
// dispatch through a function table selected once at startup (cpuid probe,
// overridable with the GLC_SIMD environment variable or select_isa()). Scalar
// and AVX2 variants are equivalence-tested: elementwise kernels must match
// bitwise, reductions to a few ulps (summation order differs).

namespace glc::kernels {

enum class Isa { scalar, avx2 };

const char* isa_name(Isa isa);

// Currently active implementation.
Isa active_isa();

// Force an implementation. Returns false (and leaves the table unchanged)
// when the requested ISA is not supported on this host.
bool select_isa(Isa isa);

// Re-run detection: best supported ISA unless GLC_SIMD=scalar is set.
void reset_isa();

bool avx2_supported();

// ---- dispatched primitives -------------------------------------------------

double dot(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);  // y += alpha*x
void scal(double alpha, double* x, std::size_t n);                   // x *= alpha
void relu(double* x, std::size_t n);                                 // x = max(x, 0)
void relu_backward(const double* pre, double* grad, std::size_t n);  // grad = 0 where pre <= 0
void abs_diff(const double* a, const double* b, double* out, std::size_t n);
void hadamard(const double* a, const double* b, double* out, std::size_t n);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scal(double alpha, double* x, std::size_t n);
void relu(double* x, std::size_t n);
void relu_backward(const double* pre, double* grad, std::size_t n);
void abs_diff(const double* a, const double* b, double* out, std::size_t n);
void hadamard(const double* a, const double* b, double* out, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define GLC_KERNELS_HAVE_AVX2 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scal(double alpha, double* x, std::size_t n);
void relu(double* x, std::size_t n);
void relu_backward(const double* pre, double* grad, std::size_t n);
void abs_diff(const double* a, const double* b, double* out, std::size_t n);
void hadamard(const double* a, const double* b, double* out, std::size_t n);
}  // namespace avx2
#else
#define GLC_KERNELS_HAVE_AVX2 0
#endif

// ---- composite operations (loops over the dispatched primitives) -----------

// C[M x N] = A[M x K] * B[K x N], all row-major. C is overwritten.
void matmul_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);

// C[M x N] = A^T * B with A[K x M], B[K x N]. C is overwritten.
void matmul_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);

// C[M x N] = A * B^T with A[M x K], B[N x K]. C is overwritten.
void matmul_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);

// out[rows x d] = S * X for a CSR matrix S (offsets/cols/vals) and row-major X.
void csr_matmul(const int* offsets, const int* cols, const double* vals, std::size_t rows,
                const double* x, std::size_t d, double* out);

// out[cols_n x d] += S^T * X. Caller zeroes `out`; cols_n is the column count of S.
void csr_t_matmul_acc(const int* offsets, const int* cols, const double* vals, std::size_t rows,
                      const double* x, std::size_t d, double* out);

}  // namespace glc::kernels
