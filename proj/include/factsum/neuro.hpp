#pragma once

#include "factsum/neuro/tensor.hpp"
#include "factsum/neuro/tape.hpp"
#include "factsum/neuro/store.hpp"
#include "factsum/neuro/layers.hpp"
#include "factsum/neuro/optim.hpp"
