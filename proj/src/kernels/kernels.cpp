#include "plap/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace plap::kernels {

namespace {

const Backend* best_available() {
    if (const Backend* b = avx2_backend()) return b;
    return &scalar_backend();
}

/// nullptr when the named backend cannot be honored.
const Backend* resolve(const char* request) {
    if (!request || std::strcmp(request, "auto") == 0) return best_available();
    if (std::strcmp(request, "scalar") == 0) return &scalar_backend();
    if (std::strcmp(request, "avx2") == 0) return avx2_backend();
    return nullptr;
}

const Backend*& active_slot() {
    static const Backend* slot = [] {
        const Backend* b = resolve(std::getenv("PLAP_KERNEL"));
        return b ? b : best_available();
    }();
    return slot;
}

}  // namespace

const Backend& active() { return *active_slot(); }

bool select(const char* name) {
    const Backend* b = resolve(name);
    if (!b) return false;
    active_slot() = b;
    return true;
}

}  // namespace plap::kernels
