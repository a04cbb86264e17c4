# nmt module
