#pragma once
// Umbrella header. Fetching (pomdpml/fetch.hpp) is kept separate because it
// pulls in the HTTP client and OpenSSL.

#include "pomdpml/bnb.hpp"
#include "pomdpml/cassandra.hpp"
#include "pomdpml/formulate.hpp"
#include "pomdpml/json_io.hpp"
#include "pomdpml/lp.hpp"
#include "pomdpml/lp_model.hpp"
#include "pomdpml/mdp.hpp"
#include "pomdpml/model.hpp"
#include "pomdpml/mps.hpp"
#include "pomdpml/policy.hpp"
#include "pomdpml/rewards.hpp"
#include "pomdpml/sim.hpp"
#include "pomdpml/smf.hpp"
