#pragma once

#include "exarray/errors.hpp"
#include "exarray/latent.hpp"
#include "exarray/measure.hpp"
#include "exarray/representation.hpp"
#include "exarray/events.hpp"
#include "exarray/montecarlo.hpp"
#include "exarray/definetti.hpp"
#include "exarray/distill.hpp"
