"""Field / boundary-condition types shared across the package."""

from __future__ import annotations

from enum import Enum


class Field(str, Enum):
    """Quantum field living in the piston.

    ``DIRICHLET`` and ``NEUMANN`` are massless scalars; ``EM`` is the
    electromagnetic field with perfectly conducting walls.
    """

    DIRICHLET = "scalar-d"
    NEUMANN = "scalar-n"
    EM = "em"

    @property
    def eta(self) -> int:
        """Reflection phase (-1 Dirichlet, +1 Neumann). Undefined for EM."""
        if self is Field.DIRICHLET:
            return -1
        if self is Field.NEUMANN:
            return 1
        raise ValueError("the electromagnetic field has no single reflection phase")

    @property
    def is_scalar(self) -> bool:
        return self is not Field.EM

    @classmethod
    def parse(cls, value: "Field | str | int") -> "Field":
        """Accept a Field, its CLI name, a loose alias, or a phase +-1."""
        if isinstance(value, Field):
            return value
        if isinstance(value, int) and not isinstance(value, bool):
            if value == -1:
                return cls.DIRICHLET
            if value == 1:
                return cls.NEUMANN
            raise ValueError(f"reflection phase must be -1 or +1, got {value}")
        key = str(value).strip().lower()
        aliases = {
            "scalar-d": cls.DIRICHLET,
            "d": cls.DIRICHLET,
            "dirichlet": cls.DIRICHLET,
            "scalar-n": cls.NEUMANN,
            "n": cls.NEUMANN,
            "neumann": cls.NEUMANN,
            "em": cls.EM,
            "electromagnetic": cls.EM,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown field type {value!r}") from None
