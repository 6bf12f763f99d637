"""Keyed-hash pseudonymization of meter identifiers."""

from __future__ import annotations

import hashlib
import hmac
from typing import Sequence

from ..errors import ValidationError
from ..model import CustomerRecord, HourlyReading


def pseudonym(meter_id: str, salt: str) -> str:
    """Deterministic pseudonym for a meter id under a salt.

    Equal ids map to equal pseudonyms; without the salt the mapping is not
    invertible.
    """
    if not salt:
        raise ValidationError("anonymization salt must be non-empty")
    digest = hmac.new(salt.encode("utf-8"), meter_id.encode("utf-8"), hashlib.sha256)
    return "m" + digest.hexdigest()[:16]


def anonymize_readings(rows: Sequence[HourlyReading], salt: str) -> list[HourlyReading]:
    return [
        HourlyReading(
            meter_id=pseudonym(r.meter_id, salt),
            read_time=r.read_time,
            consumption=r.consumption,
            temperature=r.temperature,
            temp_independent_load=r.temp_independent_load,
        )
        for r in rows
    ]


def anonymize_customers(records: Sequence[CustomerRecord], salt: str) -> list[CustomerRecord]:
    return [
        CustomerRecord(
            meter_id=pseudonym(c.meter_id, salt),
            feed_area_id=c.feed_area_id,
            neighborhood_id=c.neighborhood_id,
            anonymized=True,
            latitude=c.latitude,
            longitude=c.longitude,
        )
        for c in records
    ]
