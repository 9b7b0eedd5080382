from .base import Backbone
from .vgg import VGG16Style
from .wide_resnet import WideResNet

__all__ = ["Backbone", "VGG16Style", "WideResNet"]
