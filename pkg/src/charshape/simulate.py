"""Seeded random user behavior, for robustness and determinism studies."""
from __future__ import annotations

import random

from .registry import AttributeRegistry
from .replay import ScriptAction

_WORDS = (
    "amber", "basalt", "cheerful", "dusty", "elm", "fearless", "glass",
    "harbor", "iron", "jasmine", "kettle", "lantern", "moss", "north",
    "oak", "pepper", "quiet", "river", "slate", "thunder", "umber",
    "velvet", "willow", "yarn", "zephyr",
)

_OPEN_QUESTIONS = (
    "What is your favourite meal?",
    "Do you like jazz?",
    "What do you dream about?",
    "Tell me about your day",
    "Where would you travel if you could?",
    "What is your {display}?",
    "What do you think about rain?",
)

_CONTROL_LINES = (
    "Can you give me a suggestion?",
    "What does that mean?",
    "yes",
    "no",
    "something else",
    "skip",
    "hi",
)


def _value(rng: random.Random) -> str:
    return " ".join(rng.choice(_WORDS) for _ in range(rng.randint(1, 3)))


def random_actions(
    rng: random.Random,
    steps: int,
    registry: AttributeRegistry,
) -> list[ScriptAction]:
    """A plausible-but-messy user: answers, defines, rejects, switches modes,
    deletes, pins, and occasionally sends actions that are plain invalid."""
    definitions = list(registry)
    actions: list[ScriptAction] = []
    for _ in range(steps):
        roll = rng.random()
        if roll < 0.30:
            actions.append(ScriptAction(kind="U", text=_value(rng)))
        elif roll < 0.45:
            definition = rng.choice(definitions)
            phrase = rng.choice(definition.synonyms)
            actions.append(
                ScriptAction(kind="U", text=f"Your {phrase} is {_value(rng)}.")
            )
        elif roll < 0.60:
            actions.append(ScriptAction(kind="U", text=rng.choice(_CONTROL_LINES)))
        elif roll < 0.68:
            actions.append(ScriptAction(kind="U", text="Let's chat"))
        elif roll < 0.76:
            actions.append(ScriptAction(kind="U", text="What else could we describe?"))
        elif roll < 0.84:
            question = rng.choice(_OPEN_QUESTIONS)
            if "{display}" in question:
                question = question.format(display=rng.choice(definitions).display_name.lower())
            actions.append(ScriptAction(kind="U", text=question))
        elif roll < 0.90:
            actions.append(ScriptAction(kind="C", number=rng.randint(0, 3)))
        elif roll < 0.95:
            actions.append(ScriptAction(kind="D", text=rng.choice(definitions).id))
        else:
            actions.append(ScriptAction(kind="P", number=rng.randint(0, 40)))
    return actions
