#pragma once

#include "repdl/bounds.hpp"
#include "repdl/constructions.hpp"
#include "repdl/design.hpp"
#include "repdl/download_state.hpp"
#include "repdl/ensemble_sim.hpp"
#include "repdl/ensembles.hpp"
#include "repdl/error.hpp"
#include "repdl/fraction.hpp"
#include "repdl/mdp.hpp"
#include "repdl/placement_order.hpp"
#include "repdl/policy.hpp"
#include "repdl/random.hpp"
#include "repdl/ranking.hpp"
#include "repdl/scheme.hpp"
#include "repdl/scheme_io.hpp"
#include "repdl/simulation.hpp"
#include "repdl/subset_dp.hpp"
