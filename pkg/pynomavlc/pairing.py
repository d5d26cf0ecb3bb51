from __future__ import annotations

from logging import getLogger
from typing import List, Tuple

from .types import Binding, ChannelMatrix, Pair, PairingError, PairSet, Scheme


__all__ = ["d_nlupa"]


logger = getLogger(__name__)


def d_nlupa(binding: Binding, H: ChannelMatrix, scheme: Scheme) -> PairSet:
    """
    Divide-and-next-largest-difference user pairing.

    Users of each LED are sorted by gain towards it (descending, ties by user index)
    and the list is cut in halves: the j-th user of the strong half is paired with
    the j-th user of the weak half. With an odd count under the not-imposed scheme the
    weakest user is served alone.
    """
    per_led: List[Tuple[Pair, ...]] = []
    for led, users in enumerate(binding.per_led_users):
        ranked = sorted(users, key=lambda u: (-abs(H.gain(u, led)), u))
        if len(ranked) % 2 and scheme is Scheme.IMPOSED:
            raise PairingError(
                f"LED {led} serves {len(ranked)} users; the imposed scheme needs an even count"
            )
        half = len(ranked) // 2
        pairs = [
            Pair(led=led, index=j, strong=ranked[j], weak=ranked[j + half])
            for j in range(half)
        ]
        if len(ranked) % 2:
            pairs.append(Pair(led=led, index=half, strong=ranked[-1]))
        per_led.append(tuple(pairs))
    pair_set = PairSet(tuple(per_led), scheme, len(binding.assignment))
    logger.debug("Pairs per LED: %s", pair_set.counts)
    return pair_set
