#pragma once

#include <stdexcept>
#include <string>

namespace lembill {

enum class Errc {
  ZeroDenominator,
  MixedZones,
  BackendMismatch,
  TripleExhausted,
  MaskExhausted,
  MissingContribution,
  OpenDisagreement,
  DuplicateUserId,
  UnknownUserId,
  UnknownZone,
  UnauthorizedRecipient,
  InvalidParams,
  Timeout,
  TransportClosed,
  WireFormat,
};

const char* errc_name(Errc c);

class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) {
  throw ProtocolError(code, what);
}

}  // namespace lembill
