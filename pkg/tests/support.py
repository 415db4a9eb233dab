"""Shared fixtures for the test battery: spaces, random potentials, jobs."""

from __future__ import annotations

import numpy as np

import thermoshift as ts

BATTERY_SEED = 20260810
BATTERY_SCALE = 0.4


def full2():
    return ts.full_shift(2)


def golden():
    return ts.golden_mean_shift()


def three_letter():
    # primitive 3-symbol space with a forbidden transition per row
    return ts.build_shift(3, [[1, 1, 0], [0, 1, 1], [1, 0, 1]])


def default_past(space):
    for s in range(space.k):
        if space.matrix[s][s]:
            return ts.past_word(space, (s,))
    raise AssertionError("battery spaces all have a fixed point")


def battery_potentials(space, count=20, seed=BATTERY_SEED, scale=BATTERY_SCALE,
                       window=(0, 2)):
    rng = np.random.default_rng(seed)
    return [ts.random_potential(space, window, rng, scale) for _ in range(count)]


def battery_pairs(space, count=20, seed=BATTERY_SEED, scale=BATTERY_SCALE):
    rng = np.random.default_rng(seed + 1)
    return [(ts.random_potential(space, (0, 2), rng, scale),
             ts.random_potential(space, (0, 2), rng, scale))
            for _ in range(count)]


def battery_jobs(space, count=20, seed=BATTERY_SEED, **kwargs):
    past = default_past(space)
    return [ts.transform_job(space, g1, g2, past, **kwargs)
            for g1, g2 in battery_pairs(space, count=count, seed=seed)]


def cylinder_battery(space, max_span=4):
    cyls = []
    for span in range(1, max_span + 1):
        start = -(span // 2)
        for w in space.admissible_words(span):
            cyls.append(ts.cylinder(space, start, w))
    return cyls
