#include "nlres/model.hpp"

#include "nlres/errors.hpp"

namespace nlres {

std::string_view to_string(Model m) {
  return m == Model::Duffing ? "duffing" : "duffing-vdp";
}

std::string_view to_string(Param p) {
  switch (p) {
  case Param::Omega: return "omega";
  case Param::A: return "A";
  case Param::Gamma: return "gamma";
  }
  return "?";
}

Model parse_model(std::string_view s) {
  if (s == "duffing") return Model::Duffing;
  if (s == "duffing-vdp" || s == "vdp") return Model::DuffingVanDerPol;
  throw InvalidArgument("unknown model '" + std::string(s) + "'");
}

Param parse_param(std::string_view s) {
  if (s == "omega" || s == "w") return Param::Omega;
  if (s == "A" || s == "a") return Param::A;
  if (s == "gamma" || s == "g") return Param::Gamma;
  throw InvalidArgument("unknown parameter '" + std::string(s) + "'");
}

double ModelParams::get(Param p) const {
  switch (p) {
  case Param::Omega: return omega;
  case Param::A: return A;
  case Param::Gamma: return gamma;
  }
  return 0.0;
}

void ModelParams::set(Param p, double value) {
  switch (p) {
  case Param::Omega: omega = value; break;
  case Param::A: A = value; break;
  case Param::Gamma: gamma = value; break;
  }
}

void ModelParams::validate() const {
  if (!std::isfinite(A) || !std::isfinite(omega) || !std::isfinite(gamma))
    throw InvalidArgument("model parameters must be finite");
  if (A < 0.0) throw InvalidArgument("forcing amplitude A must be >= 0");
  if (omega <= 0.0) throw InvalidArgument("forcing frequency omega must be > 0");
  if (model == Model::Duffing && gamma < 0.0)
    throw InvalidArgument("Duffing damping gamma must be >= 0");
  if (model == Model::DuffingVanDerPol && gamma <= 0.0)
    throw InvalidArgument("Duffing-Van der Pol gamma must be > 0");
}

} // namespace nlres
