#pragma once

#include "pipenet/analysis.hpp"
#include "pipenet/composites.hpp"
#include "pipenet/core.hpp"
#include "pipenet/csv.hpp"
#include "pipenet/friction.hpp"
#include "pipenet/interconnect.hpp"
#include "pipenet/netspec.hpp"
#include "pipenet/pipe_dynamics.hpp"
#include "pipenet/simulate.hpp"
#include "pipenet/steady_state.hpp"
