__VERSION__ = "0.3.0"
