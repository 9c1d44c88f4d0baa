#pragma once

#include <stdexcept>
#include <string>

#include "config.hpp"
#include "nfqed/nfqed.h"

namespace nfqed_cli {

/// A library call that returned a non-zero status.
struct ApiError : std::runtime_error {
    ApiError(nfqed_status s, const std::string& msg) : std::runtime_error(msg), status(s) {}
    nfqed_status status;
};

void cmd_dispersion(const RunConfig& c);
void cmd_green_map(const RunConfig& c);
void cmd_pair_interaction(const RunConfig& c);
void cmd_pv_benchmark(const RunConfig& c);
void cmd_spectrum(const RunConfig& c);
void cmd_check_config(const RunConfig& c);

}  // namespace nfqed_cli
