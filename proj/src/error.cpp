#include "otas/error.hpp"

namespace otas {

Error::Error(std::string message, ExitCode code) : message_(std::move(message)), code_(code) {
  rebuild();
}

void Error::set_stage(std::string stage) {
  if (!stage_.empty()) return;
  stage_ = std::move(stage);
  rebuild();
}

void Error::rebuild() {
  full_ = stage_.empty() ? message_ : "[" + stage_ + "] " + message_;
}

RefinerError::RefinerError(std::string identifier, std::string message)
    : Error("refiner '" + identifier + "': " + message, ExitCode::kRefiner),
      identifier_(std::move(identifier)) {}

}  // namespace otas
