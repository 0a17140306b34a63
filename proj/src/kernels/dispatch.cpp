#include <atomic>
#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"

namespace svmc::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(SVMC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable kScalar{"scalar", &scalar::matvec, &scalar::pair_product, &scalar::gap_product};
#if defined(SVMC_HAVE_AVX2)
const KernelTable kAvx2{"avx2", &avx2::matvec, &avx2::pair_product, &avx2::gap_product};
#endif

const KernelTable* initial() noexcept {
    const KernelTable* best = avx2_table();
    if (const char* env = std::getenv("SVMC_KERNELS")) {
        const std::string_view want(env);
        if (want == "scalar") return &kScalar;
        if (want == "avx2" && best != nullptr) return best;
    }
    return best != nullptr ? best : &kScalar;
}

std::atomic<const KernelTable*>& current() noexcept {
    static std::atomic<const KernelTable*> table{initial()};
    return table;
}

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

const KernelTable* avx2_table() noexcept {
#if defined(SVMC_HAVE_AVX2)
    static const bool ok = cpu_has_avx2();
    return ok ? &kAvx2 : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_relaxed); }

bool select(std::string_view name) noexcept {
    if (name == "scalar") {
        current().store(&kScalar);
        return true;
    }
    if (name == "avx2" && avx2_table() != nullptr) {
        current().store(avx2_table());
        return true;
    }
    return false;
}

}  // namespace svmc::kernels
