# corpus module
