vars io, ret;
init io = 0 && ret = 0;
next (io' = io + 1 && io < 2 || io' = 0 && io >= 2) && (ret' = ret || ret' = io);
