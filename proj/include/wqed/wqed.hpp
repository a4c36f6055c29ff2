// wqed.hpp — umbrella header.

#pragma once

#include "wqed/chain.hpp"
#include "wqed/darkstates.hpp"
#include "wqed/dicke.hpp"
#include "wqed/disorder.hpp"
#include "wqed/exact.hpp"
#include "wqed/fullspace.hpp"
#include "wqed/io.hpp"
#include "wqed/observables.hpp"
#include "wqed/trajectory.hpp"
