#include "glc/kernels.hpp"

#include <cstdlib>
#include <cstring>

#if GLC_KERNELS_HAVE_AVX2
#include <cpuid.h>
#endif

namespace glc::kernels {

// ---- scalar reference ------------------------------------------------------

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal(double alpha, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void relu(double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* pre, double* grad, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (pre[i] <= 0.0) grad[i] = 0.0;
    }
}

void abs_diff(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        out[i] = d < 0.0 ? -d : d;
    }
}

void hadamard(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

}  // namespace scalar

// ---- dispatch table ----------------------------------------------------------

namespace {

struct Table {
    double (*dot)(const double*, const double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*scal)(double, double*, std::size_t);
    void (*relu)(double*, std::size_t);
    void (*relu_backward)(const double*, double*, std::size_t);
    void (*abs_diff)(const double*, const double*, double*, std::size_t);
    void (*hadamard)(const double*, const double*, double*, std::size_t);
};

constexpr Table kScalarTable = {
    scalar::dot,  scalar::sum,           scalar::axpy,     scalar::scal,
    scalar::relu, scalar::relu_backward, scalar::abs_diff, scalar::hadamard,
};

#if GLC_KERNELS_HAVE_AVX2
constexpr Table kAvx2Table = {
    avx2::dot,  avx2::sum,           avx2::axpy,     avx2::scal,
    avx2::relu, avx2::relu_backward, avx2::abs_diff, avx2::hadamard,
};

unsigned long long xgetbv0() {
    unsigned lo, hi;
    __asm__ volatile("xgetbv" : "=a"(lo), "=d"(hi) : "c"(0u));
    return (static_cast<unsigned long long>(hi) << 32) | lo;
}

bool detect_avx2() {
    unsigned eax, ebx, ecx, edx;
    // AVX2 needs OS-managed YMM state (OSXSAVE + XCR0 bits 1:2) plus the
    // CPUID.7.0:EBX AVX2 flag.
    if (!__get_cpuid(1, &eax, &ebx, &ecx, &edx)) return false;
    if (!(ecx & (1u << 27))) return false;  // OSXSAVE
    if ((xgetbv0() & 0x6) != 0x6) return false;  // XMM + YMM saved on context switch
    if (!__get_cpuid_count(7, 0, &eax, &ebx, &ecx, &edx)) return false;
    return (ebx & (1u << 5)) != 0;
}
#endif

struct State {
    Table table;
    Isa isa;

    State() {
        isa = Isa::scalar;
        table = kScalarTable;
#if GLC_KERNELS_HAVE_AVX2
        const char* env = std::getenv("GLC_SIMD");
        const bool force_scalar = env != nullptr && std::strcmp(env, "scalar") == 0;
        if (!force_scalar && detect_avx2()) {
            isa = Isa::avx2;
            table = kAvx2Table;
        }
#endif
    }
};

State& state() {
    static State s;
    return s;
}

}  // namespace

const char* isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "?";
}

Isa active_isa() { return state().isa; }

bool avx2_supported() {
#if GLC_KERNELS_HAVE_AVX2
    return detect_avx2();
#else
    return false;
#endif
}

bool select_isa(Isa isa) {
    if (isa == Isa::scalar) {
        state().table = kScalarTable;
        state().isa = Isa::scalar;
        return true;
    }
#if GLC_KERNELS_HAVE_AVX2
    if (isa == Isa::avx2 && detect_avx2()) {
        state().table = kAvx2Table;
        state().isa = Isa::avx2;
        return true;
    }
#endif
    return false;
}

void reset_isa() {
    state() = State();
}

// ---- dispatched entry points -------------------------------------------------

double dot(const double* a, const double* b, std::size_t n) { return state().table.dot(a, b, n); }
double sum(const double* x, std::size_t n) { return state().table.sum(x, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { state().table.axpy(alpha, x, y, n); }
void scal(double alpha, double* x, std::size_t n) { state().table.scal(alpha, x, n); }
void relu(double* x, std::size_t n) { state().table.relu(x, n); }
void relu_backward(const double* pre, double* grad, std::size_t n) { state().table.relu_backward(pre, grad, n); }
void abs_diff(const double* a, const double* b, double* out, std::size_t n) { state().table.abs_diff(a, b, out, n); }
void hadamard(const double* a, const double* b, double* out, std::size_t n) { state().table.hadamard(a, b, out, n); }

// ---- composite operations ----------------------------------------------------

void matmul_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    std::memset(c, 0, m * n * sizeof(double));
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            if (arow[l] != 0.0) axpy(arow[l], b + l * n, crow, n);
        }
    }
}

void matmul_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    std::memset(c, 0, m * n * sizeof(double));
    for (std::size_t l = 0; l < k; ++l) {
        const double* arow = a + l * m;
        const double* brow = b + l * n;
        for (std::size_t i = 0; i < m; ++i) {
            if (arow[i] != 0.0) axpy(arow[i], brow, c + i * n, n);
        }
    }
}

void matmul_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] = dot(arow, b + j * k, k);
    }
}

void csr_matmul(const int* offsets, const int* cols, const double* vals, std::size_t rows,
                const double* x, std::size_t d, double* out) {
    std::memset(out, 0, rows * d * sizeof(double));
    for (std::size_t i = 0; i < rows; ++i) {
        double* orow = out + i * d;
        for (int p = offsets[i]; p < offsets[i + 1]; ++p) {
            axpy(vals[p], x + static_cast<std::size_t>(cols[p]) * d, orow, d);
        }
    }
}

void csr_t_matmul_acc(const int* offsets, const int* cols, const double* vals, std::size_t rows,
                      const double* x, std::size_t d, double* out) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double* xrow = x + i * d;
        for (int p = offsets[i]; p < offsets[i + 1]; ++p) {
            axpy(vals[p], xrow, out + static_cast<std::size_t>(cols[p]) * d, d);
        }
    }
}

}  // namespace glc::kernels
