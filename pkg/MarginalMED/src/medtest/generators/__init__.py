from typing import Dict, Type, Union

from ..models.design import DesignFamily, SimDesign
from .base import BaseGenerator
from .example1 import Example1Generator
from .example2 import Example2Generator
from .gaussian_scale import GaussianScaleGenerator

GENERATORS: Dict[str, Type[BaseGenerator]] = {
    cls.FAMILY_NAME: cls for cls in (Example1Generator, Example2Generator, GaussianScaleGenerator)
}


def get_generator(family: Union[str, DesignFamily]) -> Type[BaseGenerator]:
    key = DesignFamily(family).value
    return GENERATORS[key]


def build_generator(design: SimDesign) -> BaseGenerator:
    return get_generator(design.family)(design)


__all__ = [
    "BaseGenerator",
    "Example1Generator",
    "Example2Generator",
    "GaussianScaleGenerator",
    "GENERATORS",
    "get_generator",
    "build_generator",
]
