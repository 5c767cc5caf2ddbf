#include "qfolio/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace qfolio::kernels {
namespace {

const Ops* g_active = nullptr;

const Ops* probe() {
  if (const char* env = std::getenv("QFOLIO_KERNELS")) {
    const Backend b = parse_backend(env);
    if (b == Backend::Scalar) return &scalar_ops();
    if (b == Backend::Avx2) {
      if (!avx2_available()) {
        throw std::runtime_error(
            "QFOLIO_KERNELS=avx2 but this CPU lacks AVX2/FMA");
      }
      return &avx2_ops();
    }
  }
  return avx2_available() ? &avx2_ops() : &scalar_ops();
}

}  // namespace

Backend parse_backend(const std::string& name) {
  if (name == "auto") return Backend::Auto;
  if (name == "scalar") return Backend::Scalar;
  if (name == "avx2") return Backend::Avx2;
  throw std::invalid_argument("unknown kernel backend '" + name +
                              "' (expected auto|scalar|avx2)");
}

const char* backend_name(Backend backend) {
  switch (backend) {
    case Backend::Auto:
      return "auto";
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
  }
  return "?";
}

void select(Backend backend) {
  switch (backend) {
    case Backend::Auto:
      g_active = probe();
      break;
    case Backend::Scalar:
      g_active = &scalar_ops();
      break;
    case Backend::Avx2:
      if (!avx2_available()) {
        throw std::runtime_error("AVX2/FMA kernels requested but unsupported");
      }
      g_active = &avx2_ops();
      break;
  }
}

const Ops& active() {
  if (g_active == nullptr) g_active = probe();
  return *g_active;
}

}  // namespace qfolio::kernels
