#pragma once

#include "adapt.hpp"
#include "chemistry.hpp"
#include "holder.hpp"
#include "metrics.hpp"
#include "netsim.hpp"
#include "node.hpp"
#include "protocol.hpp"
#include "requester.hpp"
#include "simulation.hpp"
#include "types.hpp"
