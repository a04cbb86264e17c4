# report module
