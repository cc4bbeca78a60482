#pragma once

// Umbrella header.
#include "chain.hpp"
#include "config.hpp"
#include "forest.hpp"
#include "graph.hpp"
#include "measure.hpp"
#include "observables.hpp"
#include "oracle.hpp"
#include "proposal.hpp"
#include "rng.hpp"
#include "tree_count.hpp"
#include "ust.hpp"
#include "version.hpp"
