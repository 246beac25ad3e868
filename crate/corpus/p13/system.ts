vars io, ret;
init io = 0 && ret = 0;
next (io < 2 && io' = io + 1 && ret' = ret) || (io >= 2 && io' = io && (ret' = ret + 1 && ret < 2 || ret' = ret && ret >= 2));
