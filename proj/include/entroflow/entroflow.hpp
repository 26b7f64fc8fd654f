#pragma once

#include "entroflow/grid.hpp"
#include "entroflow/functionals.hpp"
#include "entroflow/profiles.hpp"
#include "entroflow/diffusion.hpp"
#include "entroflow/io.hpp"
#include "entroflow/harness.hpp"
#include "entroflow/run_config.hpp"
#include "entroflow/cli.hpp"
