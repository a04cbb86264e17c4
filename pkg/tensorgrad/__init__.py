# tensorgrad module
