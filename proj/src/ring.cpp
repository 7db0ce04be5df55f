#include "lembill/ring.hpp"

namespace lembill {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::ZeroDenominator: return "ZeroDenominator";
    case Errc::MixedZones: return "MixedZones";
    case Errc::BackendMismatch: return "BackendMismatch";
    case Errc::TripleExhausted: return "TripleExhausted";
    case Errc::MaskExhausted: return "MaskExhausted";
    case Errc::MissingContribution: return "MissingContribution";
    case Errc::OpenDisagreement: return "OpenDisagreement";
    case Errc::DuplicateUserId: return "DuplicateUserId";
    case Errc::UnknownUserId: return "UnknownUserId";
    case Errc::UnknownZone: return "UnknownZone";
    case Errc::UnauthorizedRecipient: return "UnauthorizedRecipient";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::Timeout: return "Timeout";
    case Errc::TransportClosed: return "TransportClosed";
    case Errc::WireFormat: return "WireFormat";
  }
  return "Unknown";
}

PublicCoefficient quantize_coefficient(Int128 numerator, Int128 denominator) {
  if (denominator == 0) raise(Errc::ZeroDenominator, "quantize_coefficient");
  if (denominator < 0) {
    numerator = -numerator;
    denominator = -denominator;
  }
  Int128 scaled = numerator * kMoneyScale;
  Int128 quot = scaled / denominator;
  Int128 rem = scaled % denominator;
  Int128 rem_abs = rem < 0 ? -rem : rem;
  if (2 * rem_abs >= denominator) quot += (scaled < 0) ? -1 : 1;
  return PublicCoefficient{FixedPointMoney::from_micro(static_cast<int64_t>(quot))};
}

}  // namespace lembill
