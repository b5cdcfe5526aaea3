#include "si/types.hpp"

#include <sstream>

namespace si {

PairedSample::PairedSample(Matrix x, Matrix y) : x_(std::move(x)), y_(std::move(y)) {
  if (x_.rows() != y_.rows() || x_.cols() != y_.cols()) {
    std::ostringstream msg;
    msg << "margin dimension mismatch: x is " << x_.rows() << "x" << x_.cols()
        << ", y is " << y_.rows() << "x" << y_.cols();
    throw ValidationError(msg.str());
  }
  if (x_.rows() < 1) throw ValidationError("sample must have at least one row");
  if (x_.cols() < 1) throw ValidationError("sample must have at least one column");
  if (!x_.allFinite() || !y_.allFinite()) {
    throw ValidationError("sample contains a non-finite value");
  }
}

bool PairedSample::x_constant() const {
  for (Index i = 1; i < x_.rows(); ++i) {
    if (x_.row(i) != x_.row(0)) return false;
  }
  return true;
}

bool PairedSample::y_constant() const {
  for (Index i = 1; i < y_.rows(); ++i) {
    if (y_.row(i) != y_.row(0)) return false;
  }
  return true;
}

AlphaParam::AlphaParam(double alpha, AlphaContext context) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) {
    std::ostringstream msg;
    msg << "alpha must lie in (0,2), got " << alpha;
    throw ValidationError(msg.str());
  }
  if (context == AlphaContext::cauchy_margin && !(alpha < 1.0)) {
    std::ostringstream msg;
    msg << "alpha must lie in (0,1) for Cauchy margins: E|X|^alpha is infinite for alpha >= 1, got "
        << alpha;
    throw ValidationError(msg.str());
  }
}

AlphaParam validate_alpha(double alpha, AlphaContext context) {
  return AlphaParam(alpha, context);
}

const char* mode_name(EstimatorMode mode) {
  switch (mode) {
    case EstimatorMode::auto_select: return "auto";
    case EstimatorMode::u_complete: return "u-complete";
    case EstimatorMode::u_incomplete: return "u-incomplete";
    case EstimatorMode::v_fast: return "v-fast";
  }
  return "?";
}

EstimatorMode resolve_mode(const EstimatorConfig& config, Index n) {
  if (config.mode != EstimatorMode::auto_select) return config.mode;
  return n <= config.exact_threshold_n ? EstimatorMode::u_complete
                                       : EstimatorMode::u_incomplete;
}

const char* kind_name(EstimateKind kind) {
  switch (kind) {
    case EstimateKind::sicov: return "sicov";
    case EstimateKind::sicor: return "sicor";
    case EstimateKind::dcov: return "dcov";
    case EstimateKind::dcor: return "dcor";
    case EstimateKind::pearson: return "pearson";
  }
  return "?";
}

}  // namespace si
