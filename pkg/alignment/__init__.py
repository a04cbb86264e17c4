# alignment module
