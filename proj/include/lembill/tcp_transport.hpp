#pragma once

// TCP implementation of the Endpoint interface, one listening socket per
// role. Channels carry the same frames as the in-memory hub; security of
// the links (the deployment assumes private, authentic channels) is out of
// scope here and the transport is pluggable so an encrypted channel can be
// swapped in without protocol changes.

#include <map>
#include <memory>
#include <string>

#include "lembill/transport.hpp"

namespace lembill {

struct EndpointAddress {
  std::string host = "127.0.0.1";
  uint16_t port = 0;
};

using EndpointMap = std::map<Role, EndpointAddress>;

// Builds host:port assignments from a base port, role k on base+k.
EndpointMap local_endpoints(uint16_t base_port);

// Parses a JSON object of role name to "host:port", e.g.
// {"cp1": "10.0.0.1:9001", "users": "10.0.0.2:9006"}. Roles missing from
// the file keep the entries already in `eps`.
void apply_endpoint_file(EndpointMap& eps, const std::string& json_text);

// Applies LEMBILL_EP_<ROLE>=host:port environment overrides.
void apply_endpoint_env_overrides(EndpointMap& eps);

std::unique_ptr<Endpoint> make_tcp_endpoint(Role self, const EndpointMap& eps,
                                            int timeout_ms = 120000);

}  // namespace lembill
