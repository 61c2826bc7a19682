"""Shared fixtures: label vocabularies and compact dataset builders."""

from __future__ import annotations

import pytest

from civicpulse import SurveyDataset, SurveyResponse

SECTORS = (
    "Social Meetings",
    "Neighbourly Life",
    "Shopping Facilities",
    "Social Infrastructure",
    "Housing Environment",
    "Footpath Network",
    "Bike Path Network",
    "Public Transport",
    "Recreational Areas",
    "Playing Facilities",
    "Security",
)

NEIGHBORHOODS = (
    "Eastbrook",
    "Hillcrest",
    "Midtown",
    "Northgate",
    "Old Harbor",
    "Riverside",
    "Southfield",
    "Westend",
)

FULL_PARTICIPATION = {"q13": 2, "q14": 3, "q15": 1, "q16": 2, "q17": 0, "q18": 1}


def make_response(
    rid,
    neighborhood,
    qol="Good",
    satisfaction=None,
    participation=None,
    previous=None,
    proposals=(),
    household=2,
    education=3,
    employment=3,
):
    if satisfaction is None:
        satisfaction = {sector: 3 for sector in SECTORS}
    if participation is None:
        participation = dict(FULL_PARTICIPATION)
    return SurveyResponse(
        respondent_id=str(rid),
        neighborhood=neighborhood,
        previous_neighborhood=previous,
        qol_raw=qol,
        satisfaction=satisfaction,
        participation=participation,
        household=household,
        education=education,
        employment=employment,
        proposals=tuple(proposals),
    )


def make_dataset(responses, neighborhoods=NEIGHBORHOODS, sectors=SECTORS):
    return SurveyDataset(
        responses=tuple(responses),
        neighborhood_labels=tuple(neighborhoods),
        sector_labels=tuple(sectors),
    )


@pytest.fixture
def sectors():
    return SECTORS


@pytest.fixture
def neighborhoods():
    return NEIGHBORHOODS
